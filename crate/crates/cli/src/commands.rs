//! Subcommand implementations. Each returns the process exit code; errors
//! are classified by [`exit_code_for`].

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use matsync::simulation::{log_spaced, simulate, BUILTIN_NAMES};
use matsync::{
    builtin_example, find_common_p, rho_sweep, ArraySpec, ClosedLoop, FindOptions, GainSet, RecipeParams,
    RecipeRegistry, SimTrace, TimeDomain, Tolerances, Verdict,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::document::{GainsDocument, LoadedSpec, SpecDocument};
use crate::report::CheckReport;
use crate::{
    CheckArgs, Command, ExampleArgs, GainsArgs, SimulateArgs, SweepArgs, EXIT_DIVERGED, EXIT_HYPOTHESIS, EXIT_IO,
    EXIT_OK,
};

pub const DEFAULT_CT_HORIZON: f64 = 100.0;
pub const DEFAULT_DT_STEPS: f64 = 5000.0;

pub fn dispatch(command: Command) -> Result<u8> {
    let tol = Tolerances::from_env().context(matsync::tol::ENV_VAR)?;
    match command {
        Command::Check(args) => check(&args, &tol),
        Command::Gains(args) => gains(&args, &tol),
        Command::Simulate(args) => simulate_cmd(&args, &tol),
        Command::Sweep(args) => sweep(&args, &tol),
        Command::Example(args) => example(&args),
    }
}

/// 2 when a library hypothesis failed, 3 on divergence, 1 otherwise.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    use matsync::Error as E;
    match err.chain().find_map(|e| e.downcast_ref::<E>()) {
        Some(
            E::Infeasible { .. }
            | E::NotDetectable(..)
            | E::NotConnected
            | E::NotSymmetric(_)
            | E::NotNeutrallyStable
            | E::SplitIllConditioned(_)
            | E::SplitFailed(_)
            | E::NotSpd
            | E::SingularP
            | E::EigenvectorMatchFailed,
        ) => EXIT_HYPOTHESIS,
        Some(E::Diverged { .. }) => EXIT_DIVERGED,
        _ => EXIT_IO,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let doc = SpecDocument::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    doc.load().with_context(|| format!("in {}", path.display()))
}

fn check(args: &CheckArgs, tol: &Tolerances) -> Result<u8> {
    let loaded = load_spec(&args.common.spec)?;
    let report = CheckReport::build(&loaded.spec, loaded.p.as_ref(), args.common.seed, tol);
    emit(args.common.out.as_deref(), &toml::to_string(&report)?)?;
    Ok(if report.holds_for(args.recipe.as_deref()) { EXIT_OK } else { EXIT_HYPOTHESIS })
}

fn synthesize(
    recipe: &str,
    loaded: &LoadedSpec,
    alpha: Option<f64>,
    force: bool,
    seed: u64,
    tol: &Tolerances,
) -> Result<GainSet> {
    let params = RecipeParams {
        alpha: alpha.or(loaded.alpha),
        p: loaded.p.clone(),
        find: FindOptions { seed, ..Default::default() },
        force,
    };
    Ok(RecipeRegistry::with_builtins().synthesize(recipe, &loaded.spec, &params, tol)?)
}

fn gains(args: &GainsArgs, tol: &Tolerances) -> Result<u8> {
    let loaded = load_spec(&args.common.spec)?;
    let set = synthesize(&args.recipe, &loaded, args.alpha, args.force, args.common.seed, tol)?;
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    emit(args.common.out.as_deref(), &GainsDocument::from_gain_set(&set).to_toml()?)?;
    Ok(EXIT_OK)
}

fn initial_state(path: Option<&Path>, len: usize, seed: u64) -> Result<DVector<f64>> {
    let Some(path) = path else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(DVector::from_fn(len, |_, _| StandardNormal.sample(&mut rng)));
    };
    let text = read(path)?;
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("{}: `{s}` is not a number", path.display())))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != len {
        bail!("{}: expected q*n = {len} numbers, found {}", path.display(), values.len());
    }
    Ok(DVector::from_vec(values))
}

fn trace_csv(trace: &SimTrace, verdict: Verdict) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let width = trace.states.first().map_or(0, |x| x.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=width).map(|k| format!("x_{k}")));
    header.extend(["sync_error".to_string(), "disagreement".to_string()]);
    w.write_record(&header)?;
    let f = |v: f64| format!("{v:.16e}");
    for k in 0..trace.len() {
        let mut row = vec![f(trace.times[k])];
        row.extend(trace.states[k].iter().map(|&v| f(v)));
        row.push(f(trace.sync_error[k]));
        row.push(f(trace.disagreement[k]));
        w.write_record(&row)?;
    }
    let mut text = String::from_utf8(w.into_inner()?)?;
    text.push_str(&format!(
        "# verdict: {} (sync ratio {:.6e})\n",
        verdict.as_str(),
        trace.sync_ratio()
    ));
    Ok(text)
}

fn simulate_cmd(args: &SimulateArgs, tol: &Tolerances) -> Result<u8> {
    let loaded = load_spec(&args.common.spec)?;
    let spec: &ArraySpec = &loaded.spec;
    let set = match (&args.gains, &args.recipe) {
        (Some(_), Some(_)) => bail!("give either --gains or --recipe, not both"),
        (Some(path), None) => GainsDocument::parse(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?
            .to_gain_set(spec.q())?,
        (None, Some(recipe)) => synthesize(recipe, &loaded, args.alpha, args.force, args.common.seed, tol)?,
        (None, None) => match &loaded.physical_gains {
            Some(g) => g.clone(),
            None => bail!("no coupling: pass --gains or --recipe (only builder documents carry their own)"),
        },
    };
    let epsilon = match spec.domain() {
        TimeDomain::Continuous => None,
        TimeDomain::Discrete => Some(args.epsilon.or(loaded.epsilon).unwrap_or_else(|| set.default_epsilon())),
    };
    let cl = ClosedLoop::new(spec, &set, epsilon)?;
    let x0 = initial_state(args.x0.as_deref(), spec.q() * spec.n(), args.common.seed)?;
    let horizon = args.horizon.unwrap_or(match spec.domain() {
        TimeDomain::Continuous => DEFAULT_CT_HORIZON,
        TimeDomain::Discrete => DEFAULT_DT_STEPS,
    });
    let (trace, code) = match simulate(&cl, &x0, horizon, args.step) {
        Ok(trace) => (trace, EXIT_OK),
        Err(matsync::Error::Diverged { at, trace }) => {
            eprintln!("error: trajectory diverged at t = {at:.6}");
            (*trace, EXIT_DIVERGED)
        }
        Err(e) => return Err(e.into()),
    };
    let verdict = trace.verdict();
    emit(args.common.out.as_deref(), &trace_csv(&trace, verdict)?)?;
    Ok(if verdict == Verdict::Diverged { EXIT_DIVERGED } else { code })
}

fn sweep(args: &SweepArgs, tol: &Tolerances) -> Result<u8> {
    let loaded = load_spec(&args.common.spec)?;
    let p = match loaded.p {
        Some(p) => p,
        None => {
            let opts = FindOptions { seed: args.common.seed, ..Default::default() };
            find_common_p(&loaded.spec, &opts, tol).context("sweep needs a certificate P")?.p
        }
    };
    let alphas = log_spaced(args.alpha_min, args.alpha_max, args.points)?;
    let points = rho_sweep(&loaded.spec, &p, &alphas, tol)?;
    let mut text = String::from("# alpha rho\n");
    for pt in &points {
        text.push_str(&format!("{:.16e} {:.16e}\n", pt.alpha, pt.rho));
    }
    if let Some(min) = points.iter().min_by(|a, b| a.rho.total_cmp(&b.rho)) {
        text.push_str(&format!("# min rho = {:.16e} at alpha = {:.16e}\n", min.rho, min.alpha));
    }
    emit(args.common.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn example(args: &ExampleArgs) -> Result<u8> {
    let Some(name) = &args.name else {
        let mut text = String::new();
        for name in BUILTIN_NAMES {
            text.push_str(&format!("{name}\t{}\n", builtin_example(name)?.description));
        }
        emit(args.out.as_deref(), &text)?;
        return Ok(EXIT_OK);
    };
    let ex = builtin_example(name)?;
    if args.gains_out.is_some() && ex.gains.is_none() {
        bail!("example `{name}` has no gains of its own; use `matsync gains`");
    }
    emit(args.out.as_deref(), &SpecDocument::from_spec(&ex.spec, ex.p.as_ref()).to_toml()?)?;
    if let (Some(path), Some(gains)) = (&args.gains_out, &ex.gains) {
        emit(Some(path), &GainsDocument::from_gain_set(gains).to_toml()?)?;
    }
    Ok(EXIT_OK)
}
