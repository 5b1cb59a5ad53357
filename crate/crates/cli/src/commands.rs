use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use pnlab::beltrami::laplace_beltrami_oracle;
use pnlab::eisenstein::{
    cuspidality_defect, eisenstein_series, fourier_coefficient, grenier_operator, stable_chain_check, ChainProbe, EisensteinField,
    TailMode, TruncationParams,
};
use pnlab::fd::FdConfig;
use pnlab::field::{batched, ScalarField};
use pnlab::geometry::{distance, full_iwasawa, geodesic, partial_iwasawa};
use pnlab::kbessel::{k_bessel_rank1_with, Convention};
use pnlab::operators::{apply_dk, eigenvalue_lambda, laplacian_paper_matrix, LaplacianMode};
use pnlab::reduction::{grenier_membership, grenier_reduce, is_minkowski_reduced, minkowski_reduce, sandwich_probe, F3Mode};
use pnlab::rng::random_unit_det;
use pnlab::selberg::{power_function, spherical_function, SpectralParameter};
use pnlab::tori::{gamma_star_action, hg_equivalent, polarizability_check, tori_isomorphic, GammaStarElem, HgPoint};
use pnlab::volume::{volume_mc, volume_report_formula};
use pnlab::{SpdMatrix, SymMatrix};

use crate::error::CliError;
use crate::io::{num, parse_complex, parse_complex_list, parse_list, read_json, report, to_value, Series};
use crate::{
    Command, ConventionArg, Context, DomainArg, FieldArgs, FieldKind, HgCommand, LaplacianArg, TailArg, ToriCommand, Truncation,
    VolumeMode,
};

pub fn dispatch(cmd: &Command, ctx: &Context) -> Result<Value, CliError> {
    let no_series = |name: &str| -> Result<(), CliError> {
        match ctx.csv {
            Some(_) => Err(CliError::Input(format!("{name} has no CSV series"))),
            None => Ok(()),
        }
    };
    match cmd {
        Command::Iwasawa(input) => {
            no_series("iwasawa")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let p = partial_iwasawa(&y)?;
            let f = full_iwasawa(&y)?;
            Ok(report("iwasawa", json!({}), json!({ "partial": p, "full": f })))
        }
        Command::Geodesic { input, t } => {
            no_series("geodesic")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let d = distance(&SpdMatrix::identity(y.n()), &y)?;
            Ok(report("geodesic", json!({ "t": t }), json!({ "point": geodesic(&y, *t), "distance": d })))
        }
        Command::Reduce { input, domain } => {
            no_series("reduce")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let (res, member) = match domain {
                DomainArg::Minkowski => {
                    let r = minkowski_reduce(&y)?;
                    let check = is_minkowski_reduced(&r.r, 3)?;
                    (r, to_value(&check))
                }
                DomainArg::Grenier => {
                    let r = grenier_reduce(&y)?;
                    let check = grenier_membership(&r.r, F3Mode::Strict)?;
                    (r, to_value(&check))
                }
            };
            let mut out = to_value(&res);
            out["membership"] = member;
            Ok(report("reduce", json!({ "domain": res.domain }), out))
        }
        Command::Power { input, s } => {
            no_series("power")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let s = parse_complex_list("s", s)?;
            let v = power_function(&s, &y)?;
            Ok(report("power", json!({ "s": cvec(&s) }), json!({ "value": cnum(v) })))
        }
        Command::Spherical { input, s, samples } => {
            no_series("spherical")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let s = parse_complex_list("s", s)?;
            let e = spherical_function(&s, &y, *samples, ctx.seed)?;
            Ok(report("spherical", json!({ "s": cvec(&s), "samples": samples, "seed": ctx.seed }), to_value(&e)))
        }
        Command::Dk { input, k, field } => {
            no_series("dk")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let (f, params) = build_field(field, y.n(), ctx)?;
            let cfg = fd_config(field, ctx, "dk")?;
            let value = batched(f.as_ref(), |g| apply_dk(g, &y, *k, &cfg))?;
            let f0 = f.eval(&y)?;
            let mut params = params;
            params["k"] = json!(k);
            params["fd"] = to_value(&cfg);
            Ok(report("dk", params, json!({ "value": cnum(value), "field_value": cnum(f0), "ratio": ratio(value, f0) })))
        }
        Command::Laplacian { input, mode, field } => {
            no_series("laplacian")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let p = partial_iwasawa(&y)?;
            let (f, mut params) = build_field(field, y.n(), ctx)?;
            let cfg = fd_config(field, ctx, "laplacian")?;
            let value = match mode {
                LaplacianArg::Paper => batched(f.as_ref(), |g| laplacian_paper_matrix(g, &p, LaplacianMode::Corrected, &cfg))?,
                LaplacianArg::Verbatim => batched(f.as_ref(), |g| laplacian_paper_matrix(g, &p, LaplacianMode::Verbatim, &cfg))?,
                LaplacianArg::Oracle => batched(f.as_ref(), |g| laplace_beltrami_oracle(g, &p, &cfg))?,
            };
            let f0 = f.eval(&y)?;
            let s = parse_complex_list("s", &field.s)?;
            let lambda = SpectralParameter::new(y.n(), s).ok().filter(|sp| sp.s.len() + 1 == y.n()).map(|sp| eigenvalue_lambda(&sp)).transpose()?;
            params["mode"] = json!(format!("{mode:?}").to_lowercase());
            params["fd"] = to_value(&cfg);
            Ok(report(
                "laplacian",
                params,
                json!({ "value": cnum(value), "field_value": cnum(f0), "ratio": ratio(value, f0), "lambda": lambda.map(cnum) }),
            ))
        }
        Command::Lambda { s, n } => {
            no_series("lambda")?;
            let s = parse_complex_list("s", s)?;
            let n = n.unwrap_or(s.len() + 1);
            let sp = SpectralParameter::new(n, s)?;
            if sp.s.len() + 1 != n {
                return Err(CliError::Input(format!("lambda needs n - 1 = {} entries in s", n - 1)));
            }
            let lambda = eigenvalue_lambda(&sp)?;
            let xi: Vec<Value> = sp.xis().into_iter().map(cnum).collect();
            Ok(report("lambda", json!({ "n": n, "s": cvec(&sp.s) }), json!({ "lambda": cnum(lambda), "xi": xi })))
        }
        Command::Eisenstein { input, s, trunc } => {
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let sp = spectral(y.n(), s)?;
            let t = truncation(trunc, ctx)?;
            let e = eisenstein_series(&sp, &y, &t)?;
            if let Some(path) = &ctx.csv {
                // Convergence in H: the same sum at H/8, H/4, H/2, H.
                let mut series = Series::new(&["H", "terms", "re", "im"]);
                let mut hs: Vec<i64> = [8, 4, 2].iter().map(|d| t.h / d).filter(|&h| h >= 1).collect();
                hs.dedup();
                for h in hs.into_iter().filter(|&h| h < t.h) {
                    let v = eisenstein_series(&sp, &y, &TruncationParams { h, tail_mode: TailMode::None })?;
                    series.push(vec![h.to_string(), v.terms.to_string(), num(v.value.re), num(v.value.im)]);
                }
                series.push(vec![t.h.to_string(), e.terms.to_string(), num(e.value.re), num(e.value.im)]);
                series.write(path)?;
            }
            Ok(report("eisenstein", json!({ "s": cvec(&sp.s), "truncation": t }), to_value(&e)))
        }
        Command::Fourier { input, s, trunc, big_n, v, m, tol } => {
            no_series("fourier")?;
            let w: SpdMatrix = read_json(input.input.as_deref())?;
            let n = w.n() + 1;
            let sp = spectral(n, s)?;
            let t = truncation(trunc, ctx)?;
            let big_n: Vec<i64> = parse_list("N", big_n)?;
            let tol = ctx.config.tolerance("fourier", *tol, 1e-8);
            let f = EisensteinField::new(sp.clone(), t)?;
            let a = fourier_coefficient(&f, &big_n, *v, &w, *m, tol)?;
            Ok(report("fourier", json!({ "s": cvec(&sp.s), "truncation": t, "N": big_n, "v": v, "m": m, "tol": tol }), to_value(&a)))
        }
        Command::Kbessel { s, a, b, convention } => {
            no_series("kbessel")?;
            let s = parse_complex("s", s)?;
            let conv = match convention {
                ConventionArg::Decaying => Convention::Decaying,
                ConventionArg::Verbatim => Convention::Verbatim,
            };
            let k = k_bessel_rank1_with(s, *a, *b, conv)?;
            Ok(report("kbessel", json!({ "s": cnum(s), "a": a, "b": b, "convention": conv }), json!({ "value": cnum(k) })))
        }
        Command::GrenierLimit { input, s, trunc, x, schedule, tol } => {
            let w: SpdMatrix = read_json(input.input.as_deref())?;
            let sp = spectral(w.n() + 1, s)?;
            let t = truncation(trunc, ctx)?;
            let x: Vec<f64> = parse_list("x", x)?;
            let schedule: Vec<f64> = parse_list("schedule", schedule)?;
            let tol = ctx.config.tolerance("grenier-limit", *tol, 1e-2);
            let f = EisensteinField::new(sp.clone(), t)?;
            let l = batched(&f, |g| grenier_operator(g, &sp, &w, &schedule, &x, tol))?;
            if let Some(path) = &ctx.csv {
                let mut series = Series::new(&["v", "re", "im"]);
                for smp in &l.samples {
                    series.push(vec![num(smp.v), num(smp.value.re), num(smp.value.im)]);
                }
                series.write(path)?;
            }
            Ok(report("grenier-limit", json!({ "s": cvec(&sp.s), "truncation": t, "x": x, "schedule": schedule }), to_value(&l)))
        }
        Command::StableChain { input, s, trunc, schedule, tol, count } => {
            let s = parse_complex_list("s", s)?;
            let sp = SpectralParameter::new(s.len() + 1, s)?;
            let n_max = sp.n;
            let probes = match input {
                Some(p) => read_json::<ProbeDoc>(Some(p))?.probes,
                None => random_probes(n_max, *count, ctx.seed),
            };
            let t = truncation(trunc, ctx)?;
            let schedule: Vec<f64> = parse_list("schedule", schedule)?;
            let tol = ctx.config.tolerance("stable-chain", *tol, 1e-2);
            let r = stable_chain_check(&sp, &probes, &t, &schedule, tol)?;
            if let Some(path) = &ctx.csv {
                let mut series = Series::new(&["n", "probe", "v", "scaled_re", "scaled_im", "target_re", "target_im", "rel_error"]);
                for level in &r.levels {
                    for (i, e) in level.entries.iter().enumerate() {
                        for smp in &e.limit.samples {
                            series.push(vec![
                                level.n.to_string(),
                                i.to_string(),
                                num(smp.v),
                                num(smp.value.re),
                                num(smp.value.im),
                                num(e.target.re),
                                num(e.target.im),
                                num((smp.value - e.target).norm() / e.target.norm()),
                            ]);
                        }
                    }
                }
                series.write(path)?;
            }
            Ok(report(
                "stable-chain",
                json!({ "s": cvec(&sp.s), "truncation": t, "schedule": schedule, "seed": ctx.seed, "probes": probes }),
                to_value(&r),
            ))
        }
        Command::CuspDefect { input, s, trunc, j, m, tol } => {
            no_series("cusp-defect")?;
            let y: SpdMatrix = read_json(input.input.as_deref())?;
            let sp = spectral(y.n(), s)?;
            let t = truncation(trunc, ctx)?;
            let tol = ctx.config.tolerance("cusp-defect", *tol, 1e-6);
            let f = EisensteinField::new(sp.clone(), t)?;
            let d = cuspidality_defect(&f, *j, &y, *m, tol)?;
            Ok(report("cusp-defect", json!({ "s": cvec(&sp.s), "truncation": t, "j": j, "m": m, "tol": tol }), to_value(&d)))
        }
        Command::Volume { mode, n, samples } => {
            no_series("volume")?;
            let r = match mode {
                VolumeMode::Formula => volume_report_formula(*n)?,
                VolumeMode::Mc => volume_mc(*n, *samples, ctx.seed)?,
            };
            let params = match mode {
                VolumeMode::Formula => json!({ "mode": "formula", "n": n }),
                VolumeMode::Mc => json!({ "mode": "mc", "n": n, "samples": samples, "seed": ctx.seed }),
            };
            Ok(report("volume", params, to_value(&r)))
        }
        Command::Tori(ToriCommand::Polarize(input)) => {
            no_series("tori polarize")?;
            let q: SymMatrix = read_json(input.input.as_deref())?;
            Ok(report("tori polarize", json!({}), to_value(&polarizability_check(&q))))
        }
        Command::Tori(ToriCommand::Isom { input, bound }) => {
            no_series("tori isom")?;
            let doc: IsomDoc = read_json(input.input.as_deref())?;
            let w = tori_isomorphic(&doc.y1, &doc.y2, *bound)?;
            Ok(report("tori isom", json!({ "bound": bound }), json!({ "isomorphic": w.is_some(), "witness": w })))
        }
        Command::Hg(HgCommand::Act(input)) => {
            no_series("hg act")?;
            let doc: ActDoc = read_json(input.input.as_deref())?;
            let image = gamma_star_action(&doc.gamma, &doc.omega)?;
            Ok(report("hg act", json!({ "gamma": doc.gamma }), json!({ "omega": image })))
        }
        Command::Hg(HgCommand::Equiv { input, bound }) => {
            no_series("hg equiv")?;
            let doc: EquivDoc = read_json(input.input.as_deref())?;
            let g = hg_equivalent(&doc.omega1, &doc.omega2, *bound)?;
            Ok(report("hg equiv", json!({ "bound": bound }), json!({ "equivalent": g.is_some(), "gamma": g })))
        }
        Command::Sandwich { n, samples } => {
            no_series("sandwich")?;
            let r = sandwich_probe(*samples, *n, ctx.seed)?;
            Ok(report("sandwich", json!({ "n": n, "samples": samples, "seed": ctx.seed }), to_value(&r)))
        }
    }
}

#[derive(Deserialize)]
struct ProbeDoc {
    probes: Vec<Vec<ChainProbe>>,
}

#[derive(Deserialize)]
struct IsomDoc {
    #[serde(rename = "Y1")]
    y1: SpdMatrix,
    #[serde(rename = "Y2")]
    y2: SpdMatrix,
}

#[derive(Deserialize)]
struct ActDoc {
    gamma: GammaStarElem,
    omega: HgPoint,
}

#[derive(Deserialize)]
struct EquivDoc {
    omega1: HgPoint,
    omega2: HgPoint,
}

fn cnum(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn cvec(v: &[Complex64]) -> Value {
    Value::Array(v.iter().copied().map(cnum).collect())
}

fn ratio(a: Complex64, b: Complex64) -> Option<Value> {
    (b.norm() > 0.0).then(|| cnum(a / b))
}

fn spectral(n: usize, s: &str) -> Result<SpectralParameter, CliError> {
    let s = parse_complex_list("s", s)?;
    if s.len() + 1 != n {
        return Err(CliError::Input(format!("s must have n - 1 = {} entries, got {}", n.saturating_sub(1), s.len())));
    }
    Ok(SpectralParameter::new(n, s)?)
}

fn truncation(t: &Truncation, ctx: &Context) -> Result<TruncationParams, CliError> {
    let tail = t.tail.map(|m| match m {
        TailArg::None => TailMode::None,
        TailArg::Heuristic => TailMode::Heuristic,
    });
    let mut p = TruncationParams::new(ctx.config.height(t.h))?;
    p.tail_mode = ctx.config.tail_mode(tail);
    Ok(p)
}

fn fd_config(f: &FieldArgs, ctx: &Context, name: &str) -> Result<FdConfig, CliError> {
    let cfg = FdConfig { step: f.step, richardson: f.richardson, tol: ctx.config.tolerance(name, f.tol, FdConfig::default().tol) };
    cfg.validate()?;
    Ok(cfg)
}

fn build_field(f: &FieldArgs, n: usize, ctx: &Context) -> Result<(Box<dyn ScalarField>, Value), CliError> {
    let s = parse_complex_list("s", &f.s)?;
    match f.field {
        FieldKind::Power => {
            let params = json!({ "field": "power", "s": cvec(&s) });
            let field = move |y: &SpdMatrix| power_function(&s, y);
            Ok((Box::new(field), params))
        }
        FieldKind::Eisenstein => {
            let sp = spectral(n, &f.s)?;
            let t = truncation(&f.trunc, ctx)?;
            let params = json!({ "field": "eisenstein", "s": cvec(&sp.s), "truncation": t });
            Ok((Box::new(EisensteinField::new(sp, t)?), params))
        }
    }
}

/// `count` probes per level with `W` of determinant one and `x` uniform in
/// `[-1/2, 1/2]`.
fn random_probes(n_max: usize, count: usize, seed: u64) -> Vec<Vec<ChainProbe>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (2..=n_max)
        .map(|n| {
            (0..count)
                .map(|_| {
                    let w = if n == 2 { SpdMatrix::identity(1) } else { random_unit_det(&mut rng, n - 1) };
                    let x = (0..n - 1).map(|_| rng.gen::<f64>() - 0.5).collect();
                    ChainProbe { w, x }
                })
                .collect()
        })
        .collect()
}
