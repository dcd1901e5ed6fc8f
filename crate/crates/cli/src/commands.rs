//! Subcommand implementations.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use edo_core::analysis::improvement_prob_bound;
use edo_core::construct::{
    max_div_atsp, max_div_qap, max_div_stsp, qap_two_opt_trap, stsp_three_opt_trap,
    verify_no_improvement,
};
use edo_core::engine::run_ea;
use edo_core::experiment::{
    run_constrained, run_heatmap, run_unconstrained, summary_fields, write_constrained,
    write_heatmap, write_run_record, write_unconstrained, ConstrainedSpec, HeatOperator,
    HeatmapSpec, NamedInstance, UnconstrainedSpec, SUMMARY_COLUMNS,
};
use edo_core::qaplib::{format_population, gen_synthetic_qap, read_dat, read_instance, read_population};
use edo_core::rng::derive_seed;
use edo_core::{
    CountTable, EaConfig, InitMode, MeasureKind, OperatorSpec, Permutation, Problem, ProblemKind,
    TieBreak, TspInstance,
};

use crate::lists::{parse_list, parse_sizes};
use crate::{
    BoundsArgs, ConstrainedArgs, ConstructArgs, Construction, HeatmapArgs, Init, ProblemArg,
    RunArgs, UnconstrainedArgs, VerifyArgs,
};

/// Tour instance in which every tour costs `n`; the identity is recorded as
/// optimal so that thresholds can be applied.
fn unit_tsp(n: usize, symmetric: bool) -> Result<TspInstance> {
    let inst = TspInstance::new(n, vec![1.0; n * n], symmetric)?;
    Ok(inst.with_optimum(Permutation::identity(n), n as f64)?)
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn paths(list: &str) -> Vec<PathBuf> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn run(a: RunArgs) -> Result<()> {
    let (label, problem): (String, Box<dyn Problem>) = match (&a.instance, a.synthetic_n) {
        (Some(dat), None) => {
            if a.problem != ProblemArg::Qap {
                bail!("instance files are QAPLIB instances; --problem must be qap");
            }
            let (inst, _) = read_instance(dat, a.solution.as_deref())?;
            (label_of(dat), Box::new(inst))
        }
        (None, Some(n)) => match a.problem {
            ProblemArg::Qap => (format!("synthetic{n}"), Box::new(gen_synthetic_qap(n, a.seed)?)),
            ProblemArg::Stsp => (format!("unit{n}"), Box::new(unit_tsp(n, true)?)),
            ProblemArg::Atsp => (format!("unit{n}"), Box::new(unit_tsp(n, false)?)),
        },
        _ => bail!("give exactly one of --instance or --synthetic-n"),
    };
    let kind = problem.kind();
    let operator = OperatorSpec::parse_for(&a.operator, Some(kind))?;
    let measure: MeasureKind = a.measure.parse()?;
    let mut cfg = EaConfig::new(a.mu, operator, measure);
    cfg.budget = a.budget;
    cfg.alpha = a.alpha;
    cfg.seed = a.seed;
    cfg.tie_break = a.tie_break.parse()?;
    cfg.checkpoints = a.checkpoints;
    cfg.early_stop = !a.no_early_stop;
    cfg.init = match (&a.population, a.init) {
        (Some(path), _) => InitMode::Given(read_population(path)?),
        (None, Init::Random) => InitMode::DuplicateRandom,
        (None, Init::Opt) => InitMode::DuplicateOpt,
    };
    let record = run_ea(&cfg, problem.as_ref())?;

    let mut header: Vec<String> = ["instance", "problem", "n", "mu", "measure", "operator", "alpha", "tie_break"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(SUMMARY_COLUMNS.iter().map(|s| s.to_string()));
    let mut row = vec![
        label,
        kind.to_string(),
        problem.size().to_string(),
        a.mu.to_string(),
        measure.to_string(),
        operator.to_string(),
        a.alpha.map(|x| x.to_string()).unwrap_or_default(),
        cfg.tie_break.to_string(),
    ];
    row.extend(summary_fields(&record));
    let summary = |out: &mut dyn Write| -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header)?;
        w.write_record(&row)?;
        w.flush()?;
        Ok(())
    };

    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let trajectory = fs::File::create(dir.join("trajectory.csv"))?;
        write_run_record(&record, io::BufWriter::new(trajectory))?;
        summary(&mut fs::File::create(dir.join("summary.csv"))?)?;
        fs::write(dir.join("final_population.txt"), format_population(&record.final_population))?;
    }
    summary(&mut io::stdout().lock())
}

/// Instances from `.dat` files and synthetic sizes. Synthetic instances are
/// seeded per size from the master seed.
fn collect_instances(files: Option<&str>, sizes: Option<&str>, seed: u64) -> Result<Vec<NamedInstance>> {
    let mut out = Vec::new();
    for path in files.map(paths).unwrap_or_default() {
        out.push(NamedInstance::new(label_of(&path), read_dat(&path)?));
    }
    for n in sizes.map(parse_sizes).transpose()?.unwrap_or_default() {
        let inst = gen_synthetic_qap(n, derive_seed(seed, &[n as u64], 0))?;
        out.push(NamedInstance::new(format!("synthetic{n}"), inst));
    }
    if out.is_empty() {
        bail!("no instances: give --instance and/or --synthetic-n");
    }
    Ok(out)
}

pub fn unconstrained(a: UnconstrainedArgs) -> Result<()> {
    let instances = collect_instances(a.instance.as_deref(), a.synthetic_n.as_deref(), a.seed)?;
    let spec = UnconstrainedSpec {
        mus: parse_sizes(&a.mu)?,
        measures: parse_list(&a.measure)?,
        operator: OperatorSpec::parse_for(&a.operator, Some(ProblemKind::Qap))?,
        reps: a.reps,
        seed: a.seed,
        budget: a.budget,
        checkpoints: a.checkpoints,
        tie_break: a.tie_break.parse()?,
    };
    let runs = run_unconstrained(&instances, &spec)?;
    create_dir(&a.out)?;
    write_unconstrained(&runs, spec.checkpoints, &a.out)?;
    eprintln!("{} runs written to {}", runs.len(), a.out.display());
    Ok(())
}

fn heat_operator(s: &str) -> Result<HeatOperator> {
    if s.trim().eq_ignore_ascii_case("kopt:n/5") {
        Ok(HeatOperator::FifthOfN)
    } else {
        Ok(HeatOperator::Fixed(OperatorSpec::parse_for(s, Some(ProblemKind::Qap))?))
    }
}

pub fn heatmap(a: HeatmapArgs) -> Result<()> {
    let spec = HeatmapSpec {
        ns: parse_sizes(&a.synthetic_n)?,
        mus: parse_sizes(&a.mu)?,
        operators: a.operator.split(',').filter(|s| !s.trim().is_empty()).map(heat_operator).collect::<Result<_>>()?,
        reps: a.reps,
        seed: a.seed,
        tie_break: a.tie_break.parse()?,
    };
    let runs = run_heatmap(&spec)?;
    create_dir(&a.out)?;
    write_heatmap(&runs, &a.out)?;
    eprintln!("{} runs written to {}", runs.len(), a.out.display());
    Ok(())
}

pub fn constrained(a: ConstrainedArgs) -> Result<()> {
    let dats = paths(&a.instance);
    let slns = match &a.solution {
        Some(list) => paths(list),
        None => dats.iter().map(|d| d.with_extension("sln")).collect(),
    };
    if dats.is_empty() || slns.len() != dats.len() {
        bail!("need one solution file per instance ({} instances, {} solutions)", dats.len(), slns.len());
    }
    let mut instances = Vec::new();
    for (dat, sln) in dats.iter().zip(&slns) {
        let (inst, _) = read_instance(dat, Some(sln))?;
        instances.push(NamedInstance::new(label_of(dat), inst));
    }
    let spec = ConstrainedSpec {
        mus: parse_sizes(&a.mu)?,
        alphas: parse_list(&a.alpha)?,
        measures: parse_list(&a.measure)?,
        operator: OperatorSpec::parse_for(&a.operator, Some(ProblemKind::Qap))?,
        reps: a.reps,
        seed: a.seed,
        budget: a.budget,
        tie_break: a.tie_break.parse::<TieBreak>()?,
    };
    let runs = run_constrained(&instances, &spec)?;
    create_dir(&a.out)?;
    write_constrained(&runs, &a.out)?;
    eprintln!("{} runs written to {}", runs.len(), a.out.display());
    Ok(())
}

pub fn construct(a: ConstructArgs) -> Result<()> {
    let need_mu = || a.mu.context("this construction needs --mu");
    let population = match a.kind {
        Construction::QapMax => max_div_qap(a.n, need_mu()?)?,
        Construction::StspMax => max_div_stsp(a.n, need_mu()?)?,
        Construction::AtspMax => max_div_atsp(a.n, need_mu()?)?,
        Construction::QapTrap => qap_two_opt_trap(a.n)?,
        Construction::Stsp3Trap => stsp_three_opt_trap(a.n)?,
    };
    let text = format_population(&population);
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

pub fn verify(a: VerifyArgs) -> Result<()> {
    let p = read_population(&a.population)?;
    let operator = OperatorSpec::parse_for(&a.operator, Some(p.kind()))?;
    let measures: Vec<MeasureKind> = parse_list(&a.measure)?;
    let counts = CountTable::from_population(&p);
    let mut out = io::stdout().lock();
    writeln!(out, "problem\t{}", p.kind())?;
    writeln!(out, "n\t{}", p.n())?;
    writeln!(out, "mu\t{}", p.mu())?;
    writeln!(out, "max_count\t{}", counts.d_p())?;
    writeln!(out, "objects_at_max\t{}", counts.c_p())?;
    writeln!(out, "min_count\t{}", counts.min_count())?;
    writeln!(out, "spread\t{}", counts.d_p() - counts.min_count())?;
    for measure in measures {
        let report = verify_no_improvement(&p, operator, measure, a.cap)?;
        match &report.witness {
            None => writeln!(
                out,
                "measure {measure}\t{operator}\tno improving move ({} candidates checked)",
                report.checked
            )?,
            Some(w) => writeln!(
                out,
                "measure {measure}\t{operator}\timproving move: member {} -> {} replacing member {}",
                w.member + 1,
                w.neighbor,
                w.removed + 1
            )?,
        }
    }
    Ok(())
}

pub fn bounds(a: BoundsArgs) -> Result<()> {
    let kind: ProblemKind = a.problem.parse()?;
    let operators = a
        .operator
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| OperatorSpec::parse_for(s, Some(kind)))
        .collect::<edo_core::Result<Vec<_>>>()?;
    let ns = parse_sizes(&a.n)?;
    let mus = parse_sizes(&a.mu)?;
    let d_list = a.d_p.as_deref().map(parse_sizes).transpose()?;
    let mut out = io::stdout().lock();
    writeln!(out, "problem\toperator\tn\tmu\td_p\tbound")?;
    for op in operators {
        for &n in &ns {
            for &mu in &mus {
                let ds = d_list.clone().unwrap_or_else(|| (2..=mu).collect());
                for d in ds {
                    let b = improvement_prob_bound(op, n, mu, d)?;
                    writeln!(out, "{}\t{op}\t{n}\t{mu}\t{d}\t{b}", op.problem_kind())?;
                }
            }
        }
    }
    Ok(())
}
