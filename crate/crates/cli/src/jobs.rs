//! One runner per subcommand. Every runner writes its CSV artifacts,
//! prints one verdict line per checked statement in the form
//! `VERDICT <op> <detail>`, and returns whether everything came out as
//! expected.

use meseq::groups::GroupElement;
use meseq::koopman::{self, KvnEquivalence};
use meseq::operators::GoldsteinOptions;
use meseq::sequences::{ConvergenceVerdict, VerdictStatus};
use meseq::wiener::{self, TriState};

use crate::config::{self, CliResult, Experiment};
use crate::output::{fmt, OutDir};

fn verdict_line(ok: bool, op: &str, detail: &str) {
    println!("{} {op} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn status_str(v: &ConvergenceVerdict, tol: f64) -> String {
    match &v.status {
        VerdictStatus::Converged { limit, residual } => format!(
            "converged limit={} residual={} tol={}",
            fmt(limit.norm()),
            fmt(*residual),
            fmt(tol)
        ),
        VerdictStatus::Diverged => format!("diverged tol={}", fmt(tol)),
        VerdictStatus::Undecided => format!("undecided tol={}", fmt(tol)),
    }
}

fn missing(section: &str) -> String {
    format!("validation error: config has no [{section}] section")
}

pub fn run_wiener(experiment: &Experiment, svg: bool) -> CliResult<bool> {
    let job = experiment
        .raw
        .wiener
        .as_ref()
        .ok_or_else(|| missing("wiener"))?;
    let mu = experiment.measure(&job.measure)?;
    let nu = experiment.sequence(&job.sequence)?;
    let out = OutDir::create(&experiment.out)?;
    let schedule = &experiment.schedule;

    let report = wiener::wiener_verify(mu, nu, schedule)?;

    let rows: Vec<Vec<String>> = report
        .lhs
        .values
        .iter()
        .map(|(n, v)| vec![n.to_string(), fmt(v.re)])
        .collect();
    out.write_csv("wiener.csv", &["N", "lhs"], &rows)?;
    if svg {
        let series: Vec<(f64, f64)> = report
            .lhs
            .values
            .iter()
            .map(|(n, v)| (*n as f64, v.re))
            .collect();
        out.write_svg_series("wiener.svg", "‖mû‖²_N", &[("lhs", &series)])?;
    }
    if !job.fourier_samples.is_empty() {
        let mut rows = Vec::new();
        for spec in &job.fourier_samples {
            let h = GroupElement::parse(spec)?;
            let v = mu.fourier(&h)?;
            rows.push(vec![spec.clone(), fmt(v.re), fmt(v.im), fmt(v.norm_sqr())]);
        }
        out.write_csv("mu_hat.csv", &["h", "re", "im", "modulus_sq"], &rows)?;
    }

    println!(
        "-- wiener: measure `{}` against sequence `{}`",
        job.measure, job.sequence
    );
    print!("{report}");
    let converged = report.lhs.is_converged();
    verdict_line(
        converged,
        "wiener.lhs",
        &status_str(&report.lhs, schedule.tol),
    );
    let mut ok = converged;
    if report.rhs_pairing.is_some() {
        let pass = report.limit_matches_pairing == TriState::Pass;
        verdict_line(
            pass,
            "wiener.limit-matches-pairing",
            &format!("(tol={})", fmt(schedule.tol)),
        );
        ok &= pass;
    }
    Ok(ok)
}

pub fn run_kvn(experiment: &Experiment, svg: bool) -> CliResult<bool> {
    let job = experiment.raw.kvn.as_ref().ok_or_else(|| missing("kvn"))?;
    let nu = experiment.sequence(&job.sequence)?;
    let f = config::resolve_function(&job.function, nu)?;
    let eps = job.eps.clone().unwrap_or_else(koopman::default_eps);
    let out = OutDir::create(&experiment.out)?;

    let report = koopman::kvn_report(&f, nu, &eps, &experiment.schedule)?;

    let mut header: Vec<String> = vec!["N".into(), "lhs".into()];
    for (e, _) in &report.superlevel {
        header.push(format!("d_{e}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for (i, (n, v)) in report.lhs.values.iter().enumerate() {
        let mut row = vec![n.to_string(), fmt(v.re)];
        for (_, dens) in &report.superlevel {
            row.push(fmt(dens.values[i].1.re));
        }
        rows.push(row);
    }
    out.write_csv("kvn.csv", &header_refs, &rows)?;
    if svg {
        let lhs_series: Vec<(f64, f64)> = report
            .lhs
            .values
            .iter()
            .map(|(n, v)| (*n as f64, v.re))
            .collect();
        out.write_svg_series("kvn.svg", "∫f dν_N", &[("lhs", &lhs_series)])?;
    }

    println!(
        "-- kvn: function `{}` against sequence `{}`",
        f.name(),
        job.sequence
    );
    verdict_line(
        report.lhs.is_converged(),
        "kvn.lhs",
        &status_str(&report.lhs, experiment.schedule.tol),
    );
    for (e, dens) in &report.superlevel {
        verdict_line(
            dens.is_converged(),
            &format!("kvn.density[eps={e}]"),
            &status_str(dens, experiment.schedule.tol),
        );
    }
    verdict_line(
        report.markov_ok,
        "kvn.markov-bound",
        &fmt(report.max_markov_violation),
    );
    verdict_line(
        report.reverse_ok,
        "kvn.reverse-bound",
        &fmt(report.max_reverse_violation),
    );
    let verdict_ok = !matches!(
        report.verdict,
        KvnEquivalence::Inconsistent(_) | KvnEquivalence::Undecided
    );
    verdict_line(
        verdict_ok,
        "kvn.equivalence",
        &format!("{:?}", report.verdict),
    );
    Ok(verdict_ok && report.markov_ok && report.reverse_ok)
}

pub fn run_cvalue(experiment: &Experiment, svg: bool) -> CliResult<bool> {
    let job = experiment
        .raw
        .cvalue
        .as_ref()
        .ok_or_else(|| missing("cvalue"))?;
    let nu = experiment.sequence(&job.sequence)?;
    let out = OutDir::create(&experiment.out)?;

    let mut all_ok = true;
    let mut rows = Vec::new();
    let mut series_data: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    println!("-- cvalue: sequence `{}`", job.sequence);
    for spec in &job.points {
        let g = GroupElement::parse(spec)?;
        let verdict = nu.c_estimate(&g, &experiment.schedule)?;
        for (n, v) in &verdict.values {
            rows.push(vec![
                spec.clone(),
                n.to_string(),
                fmt(v.re),
                fmt(v.im),
                fmt(v.norm()),
            ]);
        }
        series_data.push((
            spec.clone(),
            verdict
                .values
                .iter()
                .map(|(n, v)| (*n as f64, v.norm()))
                .collect(),
        ));
        let ok = verdict.is_converged();
        all_ok &= ok;
        verdict_line(
            ok,
            &format!("cvalue[{spec}]"),
            &status_str(&verdict, experiment.schedule.tol),
        );
    }
    out.write_csv("cvalue.csv", &["g", "N", "re", "im", "modulus"], &rows)?;
    if svg {
        let series: Vec<(&str, &[(f64, f64)])> = series_data
            .iter()
            .map(|(name, data)| (name.as_str(), data.as_slice()))
            .collect();
        out.write_svg_series("cvalue.svg", "|c_ν(g)| partials", &series)?;
    }
    Ok(all_ok)
}

pub fn run_density(experiment: &Experiment, svg: bool) -> CliResult<bool> {
    let job = experiment
        .raw
        .density
        .as_ref()
        .ok_or_else(|| missing("density"))?;
    let nu = experiment.sequence(&job.sequence)?;
    let sets = config::resolve_sets(&job.sets)?;
    let out = OutDir::create(&experiment.out)?;

    let mut all_ok = true;
    let mut rows = Vec::new();
    let mut series_data: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    println!("-- density: sequence `{}`", job.sequence);
    for set in &sets {
        let verdict = nu.density_estimate(set, &experiment.schedule)?;
        for (n, v) in &verdict.values {
            rows.push(vec![set.name().to_string(), n.to_string(), fmt(v.re)]);
        }
        series_data.push((
            set.name().to_string(),
            verdict
                .values
                .iter()
                .map(|(n, v)| (*n as f64, v.re))
                .collect(),
        ));
        let ok = verdict.is_converged();
        all_ok &= ok;
        verdict_line(
            ok,
            &format!("density[{}]", set.name()),
            &status_str(&verdict, experiment.schedule.tol),
        );
    }
    out.write_csv("density.csv", &["set", "N", "value"], &rows)?;
    if svg {
        let series: Vec<(&str, &[(f64, f64)])> = series_data
            .iter()
            .map(|(name, data)| (name.as_str(), data.as_slice()))
            .collect();
        out.write_svg_series("density.svg", "ν_N(J)", &series)?;
    }
    Ok(all_ok)
}

pub fn run_decompose(experiment: &Experiment) -> CliResult<bool> {
    let job = experiment
        .raw
        .decompose
        .as_ref()
        .ok_or_else(|| missing("decompose"))?;
    let sys = experiment.system(&job.system)?;
    let out = OutDir::create(&experiment.out)?;

    println!("-- decompose: system `{}` (dim {})", job.system, sys.dim());
    let check = sys.contraction_check();
    for (name, sigma) in &check.entries {
        println!("   σ_max({name}) = {sigma:.12}");
    }
    verdict_line(check.contractive, "decompose.contraction-check", "");
    if !check.contractive {
        return Ok(false);
    }
    let split = sys.eigenprojections()?;
    println!(
        "   dim X₁ = {}, dim X₂ = {}",
        split.x1_dim(),
        split.x2_dim()
    );
    let mut rows = Vec::new();
    for (g, p) in &split.projections {
        let rank = p.trace().re.round() as i64;
        let lambda = match g {
            GroupElement::CirclePoint(t) => meseq_unit(-t),
            GroupElement::Real(r) => meseq_unit(-r),
            GroupElement::Residue { value, modulus } => {
                meseq_unit(-(*value as f64) / *modulus as f64)
            }
            _ => meseq_unit(0.0),
        };
        rows.push(vec![
            g.to_string(),
            fmt(lambda.re),
            fmt(lambda.im),
            rank.to_string(),
        ]);
        println!("   P[{g}] rank {rank}");
    }
    out.write_csv(
        "decompose.csv",
        &["character", "eigenvalue_re", "eigenvalue_im", "rank"],
        &rows,
    )?;
    verdict_line(
        true,
        "decompose.split",
        &format!("x1={} x2={}", split.x1_dim(), split.x2_dim()),
    );
    Ok(true)
}

fn meseq_unit(phase: f64) -> num_complex::Complex64 {
    let (s, c) = (std::f64::consts::TAU * phase).sin_cos();
    num_complex::Complex64::new(c, s)
}

pub fn run_goldstein(experiment: &Experiment, svg: bool) -> CliResult<bool> {
    let job = experiment
        .raw
        .goldstein
        .as_ref()
        .ok_or_else(|| missing("goldstein"))?;
    let sys = experiment.system(&job.system)?;
    let nu = experiment.sequence(&job.sequence)?;
    let out = OutDir::create(&experiment.out)?;

    let (x, y) = match job.vectors.as_str() {
        "random" => {
            let mut rng = meseq::operators::seeded_rng(experiment.seed);
            let x = meseq::operators::random_unit_vector(&mut rng, sys.dim());
            let y = meseq::operators::random_unit_vector(&mut rng, sys.dim());
            (x, y)
        }
        "explicit" => {
            let to_vec = |data: &Option<Vec<[f64; 2]>>, what: &str| -> CliResult<_> {
                let data = data
                    .as_ref()
                    .ok_or_else(|| format!("goldstein explicit vectors need `{what}`"))?;
                Ok(nalgebra::DVector::from_iterator(
                    data.len(),
                    data.iter()
                        .map(|[re, im]| num_complex::Complex64::new(*re, *im)),
                ))
            };
            (to_vec(&job.x, "x")?, to_vec(&job.y, "y")?)
        }
        other => return Err(format!("unknown vectors mode `{other}`").into()),
    };

    let mut opts = GoldsteinOptions::defaults_for(sys);
    opts.tol = experiment.tol_goldstein;
    let report = sys.goldstein_verify(&x, &y, nu, &experiment.schedule, &opts)?;

    let rows: Vec<Vec<String>> = report
        .lhs
        .values
        .iter()
        .zip(&report.gaps)
        .map(|((n, v), (_, gap))| vec![n.to_string(), fmt(v.re), fmt(report.rhs), fmt(*gap)])
        .collect();
    out.write_csv("goldstein.csv", &["N", "lhs", "rhs", "gap"], &rows)?;
    if svg {
        let lhs_series: Vec<(f64, f64)> = report
            .lhs
            .values
            .iter()
            .map(|(n, v)| (*n as f64, v.re))
            .collect();
        let rhs_series: Vec<(f64, f64)> = report
            .lhs
            .values
            .iter()
            .map(|(n, _)| (*n as f64, report.rhs))
            .collect();
        out.write_svg_series(
            "goldstein.svg",
            "mean limit vs projection sum",
            &[("lhs", &lhs_series), ("rhs", &rhs_series)],
        )?;
    }

    println!(
        "-- goldstein: system `{}`, sequence `{}`, dim X₁ = {}",
        job.system,
        job.sequence,
        report.split.x1_dim()
    );
    println!("   rhs Σ|(P_a x|y)|² = {}", fmt(report.rhs));
    verdict_line(
        report.ergodic.consistent_on_grid,
        "goldstein.ergodicity-probe",
        "",
    );
    verdict_line(
        report.invariance.consistent,
        "goldstein.invariance-probe",
        "",
    );
    let final_gap = report.gaps.last().map(|(_, g)| *g).unwrap_or(f64::NAN);
    verdict_line(
        report.pass,
        "goldstein.limit",
        &format!(
            "final-gap={} tol={} shrinking={}",
            fmt(final_gap),
            fmt(experiment.tol_goldstein),
            report.gap_shrinking
        ),
    );
    Ok(report.pass)
}

pub fn run_extremal(experiment: &Experiment) -> CliResult<bool> {
    let job = experiment
        .raw
        .extremal
        .as_ref()
        .ok_or_else(|| missing("extremal"))?;
    let nu = experiment.sequence(&job.sequence)?;
    let grid = config::parse_grid(&job.grid)?;
    let out = OutDir::create(&experiment.out)?;

    let report = wiener::extremality_check(nu, &grid, &experiment.schedule)?;

    let mut rows = Vec::new();
    for v in &report.violators {
        rows.push(vec![
            v.point.to_string(),
            fmt(v.c_value.re),
            fmt(v.c_value.im),
            "violator".into(),
            fmt(v.witness_limit.last_value().re),
        ]);
    }
    for g in &report.gaps {
        rows.push(vec![
            g.to_string(),
            String::new(),
            String::new(),
            "undecided".into(),
            String::new(),
        ]);
    }
    out.write_csv(
        "extremal.csv",
        &["g", "c_re", "c_im", "status", "witness_lhs_final"],
        &rows,
    )?;

    println!(
        "-- extremal: sequence `{}` on grid `{}` ({} points)",
        job.sequence, job.grid, report.grid_size
    );
    for v in &report.violators {
        println!(
            "   violator {} with c = {:.6}, witness limit verdict {}",
            v.point, v.c_value, v.witness_confirmed
        );
    }
    let witnesses_ok = report
        .violators
        .iter()
        .all(|v| v.witness_confirmed != TriState::Fail);
    verdict_line(
        report.gaps.is_empty(),
        "extremal.grid-coverage",
        &format!("{} undecided", report.gaps.len()),
    );
    verdict_line(
        witnesses_ok,
        "extremal.witnesses",
        &format!("{} violators", report.violators.len()),
    );
    if report.consistent_on_grid {
        println!("   consistent with extremal-for-discrete on this grid");
    }
    Ok(report.gaps.is_empty() && witnesses_ok)
}
