use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{cnum, num, parse_decimal, Check, ExperimentConfig, ReferenceSource as Src, Table};
use crate::distributions::{
    coeff_c, coeff_ctilde, dcoeff_c, identity_suite, DistributionQuery, Family, Pairer, TestFunction,
};
use crate::error::{Error, Result};
use crate::eta::{default_grid, eta_heat, eta_smeared, eta_zeta, EtaResult};
use crate::hadamard::{diagonal_coefficients, index_density, integrated_index_density, transport_residual, FlatOperatorSpec};
use crate::index::index_report;
use crate::models::{build_circle_dirac, build_jordan_model, laplace_from_dirac, CircleOperatorSpec, CylinderModel};
use crate::propagator::{convergence_study, KernelFamily, KernelKind};
use crate::spectral::{complex_power, frequency_projectors, CMat, OperatorMatrix, RaySpec, DEFAULT_CLUSTER_TOL};

pub(super) type Section = (Vec<Check>, BTreeMap<String, Table>);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn tables(list: Vec<(&str, Table)>) -> BTreeMap<String, Table> {
    list.into_iter().map(|(k, t)| (k.to_string(), t)).collect()
}

fn circle_models() -> Result<Vec<(String, OperatorMatrix)>> {
    let mut out = Vec::new();
    for (name, a) in [("circle_a0.25", 0.25), ("circle_a0", 0.0), ("circle_a0.5", 0.5), ("circle_a-0.7", -0.7)] {
        out.push((name.to_string(), build_circle_dirac(&CircleOperatorSpec::flux_only(a, 4))?));
    }
    let mut spec = CircleOperatorSpec::flux_only(0.2, 3);
    spec.rank = 2;
    let v = CMat::from_row_slice(2, 2, &[c(0.1), C64::new(0.05, 0.02), C64::new(0.05, -0.02), c(-0.15)]);
    spec.potential = vec![(1, v.clone()), (-1, v.adjoint())];
    out.push(("circle_rank2_potential".into(), build_circle_dirac(&spec)?));
    let mut spec = CircleOperatorSpec::flux_only(0.3, 3);
    spec.potential = vec![(2, CMat::from_element(1, 1, C64::new(0.2, 0.1)))];
    out.push(("circle_nonnormal".into(), build_circle_dirac(&spec)?));
    out.push(("jordan".into(), build_jordan_model(3)?));
    Ok(out)
}

/// Worst deviations of the projector relations for one operator.
fn projector_deviations(d: &OperatorMatrix) -> Result<[f64; 4]> {
    let ray = RaySpec::default();
    let p = frequency_projectors(d, ray, DEFAULT_CLUSTER_TOL)?;
    let n = d.dim();
    let one = CMat::identity(n, n);
    let (gt, lt, z) = (p.p_gt.entries(), p.p_lt.entries(), p.p_0.entries());
    let sum = (gt + lt + z - &one).norm();
    let mut ann: f64 = 0.0;
    let ps = [gt, lt, z];
    for (i, a) in ps.iter().enumerate() {
        for (j, b) in ps.iter().enumerate() {
            let want = if i == j { (*a).clone() } else { CMat::zeros(n, n) };
            ann = ann.max((*a * *b - want).norm());
        }
    }
    let dm = d.entries();
    let comm = ps.iter().map(|a| (*a * dm - dm * *a).norm()).fold(0.0, f64::max);
    let delta = OperatorMatrix::new(dm * dm)?;
    let root = complex_power(&delta, c(0.5), ray, DEFAULT_CLUSTER_TOL)?;
    let abs = (p.sign() * dm - root.entries()).norm();
    Ok([sum, ann, comm, abs])
}

fn random_operator(rng: &mut ChaCha8Rng, min: usize, max: usize) -> Result<OperatorMatrix> {
    let n = rng.random_range(min..=max);
    let m = CMat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    OperatorMatrix::new(m)
}

const RELATIONS: [&str; 4] = ["completeness", "annihilation", "commutation", "absolute_value"];

pub(super) fn propagator(cfg: &ExperimentConfig, seed: u64) -> Section {
    let p = &cfg.projectors;
    let mut checks = Vec::new();
    let mut worst = [0.0f64; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut redraws = 0usize;
    let mut failure = None;
    let mut done = 0;
    while done < p.random_matrices {
        let r = random_operator(&mut rng, p.min_dim, p.max_dim).and_then(|d| projector_deviations(&d));
        match r {
            Ok(dev) => {
                for i in 0..4 {
                    worst[i] = worst[i].max(dev[i]);
                }
                done += 1;
            }
            // draws with near-degenerate or ray-touching spectra are outside the
            // preconditions and are replaced
            Err(Error::AmbiguousClustering(..)) | Err(Error::EigenvalueOnRay(_)) if redraws < p.random_matrices => {
                redraws += 1
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    match failure {
        Some(e) => checks.push(Check::error("projectors.random", 1, &e)),
        None => {
            for (i, rel) in RELATIONS.iter().enumerate() {
                let mut ch = Check::new(format!("projectors.random.{rel}"), 1, num(worst[i]), num(0.0), worst[i], p.tolerance, Src::Exact);
                if redraws > 0 {
                    ch = ch.with_note(format!("{redraws} draws replaced"));
                }
                checks.push(ch);
            }
        }
    }

    let mut split = Table::new(&["model", "t", "p_lt_k_norm", "p_ge_k_norm"]);
    match circle_models() {
        Err(e) => checks.push(Check::error("projectors.circle", 1, &e)),
        Ok(models) => {
            for (name, d) in &models {
                match projector_deviations(d) {
                    Ok(dev) => {
                        for (i, rel) in RELATIONS.iter().enumerate() {
                            checks.push(Check::new(format!("projectors.{name}.{rel}"), 1, num(dev[i]), num(0.0), dev[i], p.tolerance, Src::Exact));
                        }
                    }
                    Err(e) => checks.push(Check::error(format!("projectors.{name}"), 1, &e)),
                }
                match splitting(d, &p.splitting_times, name, &mut split) {
                    Ok(w) => checks.push(Check::new(format!("splitting.{name}"), 7, num(w), num(0.0), w, p.splitting_tolerance, Src::Exact)),
                    Err(e) => checks.push(Check::error(format!("splitting.{name}"), 7, &e)),
                }
            }
        }
    }

    let g = &cfg.propagator;
    let mut conv = Table::new(&["model", "kernel", "level", "l2_residual", "observed_order"]);
    let cases: Vec<(&str, KernelKind, Result<OperatorMatrix>)> = vec![
        ("circle", KernelKind::FeynmanWave, build_circle_dirac(&CircleOperatorSpec::flux_only(g.flux, g.k)).and_then(|d| laplace_from_dirac(&d))),
        ("circle", KernelKind::FeynmanDirac, build_circle_dirac(&CircleOperatorSpec::flux_only(g.flux, g.k))),
        ("jordan", KernelKind::FeynmanDirac, build_jordan_model(g.k)),
    ];
    for (model, kind, base) in cases {
        let kname = if kind == KernelKind::FeynmanWave { "wave" } else { "dirac" };
        let name = format!("fundamental_solution.{model}.{kname}");
        let r = base
            .and_then(|b| KernelFamily::new(kind, b, RaySpec::default(), DEFAULT_CLUSTER_TOL))
            .and_then(|fam| convergence_study(&fam, g.t_minus, g.t_plus, g.nodes, g.levels));
        match r {
            Ok((errs, orders)) => {
                for (i, e) in errs.iter().enumerate() {
                    let o = if i == 0 { Value::Null } else { num(orders[i - 1]) };
                    conv.push(vec![json!(model), json!(kname), json!(i), num(*e), o]);
                }
                let worst = orders.iter().map(|o| (o - g.expected_order).abs()).fold(0.0, f64::max);
                let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
                checks.push(Check::new(name, 6, num(min_order), num(g.expected_order), worst, g.order_tolerance, Src::Exact));
            }
            Err(e) => checks.push(Check::error(name, 6, &e)),
        }
    }
    (checks, tables(vec![("frequency_splitting", split), ("propagator_convergence", conv)]))
}

fn splitting(d: &OperatorMatrix, times: &[f64], name: &str, table: &mut Table) -> Result<f64> {
    let fam = KernelFamily::new(KernelKind::FeynmanDirac, d.clone(), RaySpec::default(), DEFAULT_CLUSTER_TOL)?;
    let p = fam.projectors().ok_or_else(|| Error::InvalidInput("kernel family has no projectors".into()))?;
    let (lt, ge) = (p.p_lt.entries().clone(), p.p_ge());
    let mut worst: f64 = 0.0;
    for &t in times {
        let k = fam.eval(t)?;
        let a = (&lt * k.entries()).norm();
        let b = (&ge * k.entries()).norm();
        table.push(vec![json!(name), num(t), num(a), num(b)]);
        worst = worst.max(if t > 0.0 { a } else if t < 0.0 { b } else { 0.0 });
    }
    Ok(worst)
}

/// `(eta, h)` of `-i d/dtheta + a` on the circle.
fn eta_oracle(a: f64) -> (f64, usize) {
    let frac = a - a.floor();
    if frac == 0.0 {
        (0.0, 1)
    } else {
        (1.0 - 2.0 * frac, 0)
    }
}

type EtaRoutes = Vec<(String, f64, Vec<(&'static str, Result<EtaResult>)>)>;

fn eta_routes(cfg: &ExperimentConfig) -> Result<EtaRoutes> {
    let ray = RaySpec::default();
    let grid = default_grid(cfg.eta.k);
    let mut out = Vec::new();
    for (i, s) in cfg.eta.fluxes.iter().enumerate() {
        let a = parse_decimal(s, &format!("eta.fluxes[{i}]"))?;
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(a, cfg.eta.k))?;
        let routes = vec![("zeta", eta_zeta(&d, ray)), ("heat", eta_heat(&d, ray, &grid)), ("smeared", eta_smeared(&d, ray, &grid))];
        out.push((s.clone(), a, routes));
    }
    Ok(out)
}

fn eta_like(cfg: &ExperimentConfig, xi: bool) -> Section {
    let what = if xi { "xi" } else { "eta" };
    let mut checks = Vec::new();
    let mut t = Table::new(&["flux", "method", "eta", "h", "xi", "error_estimate"]);
    let routes = match eta_routes(cfg) {
        Ok(r) => r,
        Err(e) => return (vec![Check::error(what, 5, &e)], BTreeMap::new()),
    };
    for (label, a, rs) in routes {
        let (eta, h) = eta_oracle(a);
        let want = if xi { (eta + h as f64) / 2.0 } else { eta };
        for (method, r) in rs {
            let name = format!("{what}.a{label}.{method}");
            match r {
                Ok(r) => {
                    t.push(vec![json!(label), json!(method), num(r.eta.re), json!(r.h), num(r.xi.re), num(r.error_estimate)]);
                    let got = if xi { r.xi } else { r.eta };
                    let mut dev = (got - c(want)).norm();
                    if r.h != h {
                        dev = f64::INFINITY;
                    }
                    checks.push(Check::new(name, 5, cnum(got), num(want), dev, cfg.eta.tolerance, Src::Oracle));
                }
                Err(e) => checks.push(Check::error(name, 5, &e)),
            }
        }
    }
    (checks, tables(vec![(what, t)]))
}

pub(super) fn eta(cfg: &ExperimentConfig) -> Section {
    eta_like(cfg, false)
}

pub(super) fn xi(cfg: &ExperimentConfig) -> Section {
    eta_like(cfg, true)
}

fn cylinder(cfg: &ExperimentConfig, i: usize) -> Result<(CylinderModel, f64, f64)> {
    let p = &cfg.index.paths[i];
    let a = parse_decimal(&p.a_minus, &format!("index.paths[{i}].a_minus"))?;
    let b = parse_decimal(&p.a_plus, &format!("index.paths[{i}].a_plus"))?;
    Ok((CylinderModel::smoothstep(a, b, cfg.index.duration, cfg.index.k), a, b))
}

fn path_label(cfg: &ExperimentConfig, i: usize) -> String {
    let p = &cfg.index.paths[i];
    format!("{}->{}", p.a_minus, p.a_plus)
}

pub(super) fn index(cfg: &ExperimentConfig) -> Section {
    let ix = &cfg.index;
    let mut checks = Vec::new();
    let mut t = Table::new(&[
        "path", "trace_index", "rounded_index", "spectral_flow", "xi_plus", "xi_minus", "curvature_integral", "xi_rhs", "duality_residual",
    ]);
    let ray = RaySpec::default();
    for i in 0..ix.paths.len() {
        let label = path_label(cfg, i);
        let expected = ix.paths[i].expected_index as f64;
        let r = cylinder(cfg, i).and_then(|(m, _, _)| index_report(&m, ray));
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                checks.push(Check::error(format!("index.{label}"), 8, &e));
                continue;
            }
        };
        let tr = r.index.trace_index;
        let sf = r.spectral_flow as f64;
        t.push(vec![
            json!(label),
            num(tr.re),
            json!(r.index.rounded_index),
            json!(r.spectral_flow),
            num(r.xi.xi_plus.re),
            num(r.xi.xi_minus.re),
            num(r.xi.curvature_integral.re),
            num(r.xi.rhs.re),
            num(r.duality_residual),
        ]);
        checks.push(Check::new(format!("index.{label}.trace_integrality"), 8, cnum(tr), num(expected), (tr - c(expected)).norm(), ix.integrality_tolerance, Src::Stated));
        checks.push(Check::new(format!("index.{label}.spectral_flow"), 8, json!(r.spectral_flow), num(expected), (sf - expected).abs(), 0.5, Src::Oracle));
        checks.push(Check::new(format!("index.{label}.trace_vs_flow"), 8, cnum(tr), json!(r.spectral_flow), (tr - c(sf)).norm(), ix.integrality_tolerance, Src::Oracle));
        checks.push(Check::new(format!("index.{label}.xi_formula"), 8, cnum(r.xi.rhs), cnum(tr), (r.xi.rhs - tr).norm(), ix.xi_tolerance, Src::Oracle));
        checks.push(Check::new(format!("index.{label}.duality"), 8, num(r.duality_residual), num(0.0), r.duality_residual, ix.duality_tolerance, Src::Exact));
    }
    (checks, tables(vec![("index", t)]))
}

fn lift(f: &TestFunction, tc: &super::TestFunctionConfig, n: usize) -> Result<TestFunction> {
    if f.dim() == n {
        return Ok(f.clone());
    }
    let mut center = tc.center.clone();
    center.resize(n, 0.15);
    let terms: Vec<(Vec<u32>, f64)> = tc
        .terms
        .iter()
        .filter(|t| t.exponents.iter().skip(n).all(|e| *e == 0))
        .map(|t| {
            let mut e = t.exponents.clone();
            e.resize(n, 0);
            (e, t.coefficient)
        })
        .collect();
    match tc.envelope.as_str() {
        "bump" => TestFunction::bump(center, tc.width, &terms),
        _ => TestFunction::gaussian_poly(center, tc.width, &terms),
    }
}

pub(super) fn distributions(cfg: &ExperimentConfig) -> Section {
    let d = &cfg.distributions;
    let mut checks = Vec::new();
    let lambda = match parse_decimal(&d.lambda, "distributions.lambda") {
        Ok(l) => l,
        Err(e) => return (vec![Check::error("distributions", 3, &e)], BTreeMap::new()),
    };

    // structure constants
    let ct = d.constant_tolerance;
    let consts = [
        ("structure.C(0,2)", coeff_c(c(0.0), 2), c(0.25)),
        ("structure.C(1,2)", coeff_c(c(1.0), 2), c(1.0 / 16.0)),
        ("structure.dC(-1,2)", dcoeff_c(c(-1.0), 2), c(1.0)),
        ("structure.Ctilde(-1,2)", coeff_ctilde(c(-1.0), 2, lambda), C64::new(0.0, 1.0 / std::f64::consts::PI)),
    ];
    for (name, got, want) in consts {
        let src = if name.starts_with("structure.C(") { Src::Exact } else { Src::Stated };
        let mut ch = Check::new(name, 4, cnum(got), cnum(want), (got - want).norm(), ct, src);
        if !ch.pass {
            ch = ch.with_note("C(beta, 2) has a double zero at beta = -1");
        }
        checks.push(ch);
    }

    let strategy = match cfg.strategy() {
        Ok(s) => s,
        Err(e) => return (vec![Check::error("distributions", 3, &e)], BTreeMap::new()),
    };
    let mut phis = Vec::new();
    for (i, tc) in d.test_functions.iter().enumerate() {
        match tc.build(&format!("distributions.test_functions[{i}]")) {
            Ok(f) => phis.push(f),
            Err(e) => return (vec![Check::error("distributions", 3, &e)], BTreeMap::new()),
        }
    }

    // delta identities: F_{-3/2} in n = 3 and G_{-1} in n = 2
    let mut delta = Table::new(&["family", "sign", "n", "phi", "value_re", "value_im", "phi_at_origin", "error_estimate"]);
    let mut pr = Pairer::new();
    for (fam, beta, n) in [(Family::F, -1.5, 3usize), (Family::G, -1.0, 2)] {
        for (idx, tc) in d.test_functions.iter().enumerate() {
            let phi = match lift(&phis[idx], tc, n) {
                Ok(p) => p,
                Err(e) => {
                    checks.push(Check::error(format!("delta.{}.phi{idx}", fam.name()), 2, &e));
                    continue;
                }
            };
            let want = phi.value(&vec![0.0; n]);
            for s in [1i8, -1] {
                let tag = if s > 0 { "+" } else { "-" };
                let name = format!("delta.{}{tag}({beta},{n}).phi{idx}", fam.name());
                let q = DistributionQuery::new(fam, c(beta), s, n).with_lambda(lambda).with_strategy(strategy.clone());
                match pr.pair(&q, &phi) {
                    Ok(p) => {
                        delta.push(vec![json!(fam.name()), json!(tag), json!(n), json!(idx), num(p.value.re), num(p.value.im), num(want), num(p.error_estimate)]);
                        let dev = (p.value - c(want)).norm() / want.abs().max(1e-300);
                        checks.push(Check::new(name, 2, cnum(p.value), num(want), dev, d.delta_tolerance, Src::Exact));
                    }
                    Err(e) => checks.push(Check::error(name, 2, &e)),
                }
            }
        }
    }

    let mut ids = Table::new(&["identity", "beta", "phi", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "relative_deviation", "error_estimate"]);
    let mut betas = Vec::new();
    for (i, b) in d.betas.iter().enumerate() {
        match parse_decimal(b, &format!("distributions.betas[{i}]")) {
            Ok(v) => betas.push((b.clone(), c(v))),
            Err(e) => return (vec![Check::error("distributions", 3, &e)], BTreeMap::new()),
        }
    }
    let bvals: Vec<C64> = betas.iter().map(|b| b.1).collect();
    match identity_suite(&bvals, d.n, lambda, &phis, &strategy, d.tolerance) {
        Ok(list) => {
            for r in list {
                let blabel = betas.iter().find(|b| b.1 == r.beta).map(|b| b.0.clone()).unwrap_or_default();
                ids.push(vec![
                    json!(r.identity),
                    json!(blabel),
                    json!(r.phi_index),
                    num(r.lhs.re),
                    num(r.lhs.im),
                    num(r.rhs.re),
                    num(r.rhs.im),
                    num(r.relative_deviation),
                    num(r.error_estimate),
                ]);
                let name = format!("identity.{}.beta{}.phi{}", r.identity, blabel, r.phi_index);
                checks.push(Check::new(name, 3, cnum(r.lhs), cnum(r.rhs), r.relative_deviation, d.tolerance, Src::Exact));
            }
        }
        Err(e) => checks.push(Check::error("identity", 3, &e)),
    }
    (checks, tables(vec![("delta", delta), ("identities", ids)]))
}

pub(super) fn hadamard(cfg: &ExperimentConfig) -> Section {
    let h = &cfg.hadamard;
    let mut checks = Vec::new();
    let r = h.potential.len();
    let b = CMat::from_fn(r, r, |i, j| c(h.potential[i][j]));
    let spec = FlatOperatorSpec::constant_potential(2, b.clone());
    let mut diag = Table::new(&["k", "row", "col", "value_re", "value_im", "expected_re", "expected_im"]);
    match diagonal_coefficients(&spec, &h.base_point, h.k_max) {
        Ok(dc) => {
            let mut want = CMat::identity(r, r);
            let minus_b = -b.clone();
            for (k, v) in dc.values.iter().enumerate() {
                if k > 0 {
                    want = &want * &minus_b;
                }
                for i in 0..r {
                    for j in 0..r {
                        diag.push(vec![json!(k), json!(i), json!(j), num(v[(i, j)].re), num(v[(i, j)].im), num(want[(i, j)].re), num(want[(i, j)].im)]);
                    }
                }
                let dev = (v - &want).norm() / want.norm().max(1.0);
                checks.push(Check::new(format!("hadamard.diagonal.V{k}"), 9, num(v.norm()), num(want.norm()), dev, h.tolerance, Src::Exact));
            }
        }
        Err(e) => checks.push(Check::error("hadamard.diagonal", 9, &e)),
    }
    match transport_residual(&spec, &h.segment_end, &h.base_point, h.k_max, h.samples) {
        Ok(res) => checks.push(Check::new("hadamard.transport.constant", 9, num(res), num(0.0), res, h.tolerance, Src::Exact)),
        Err(e) => checks.push(Check::error("hadamard.transport.constant", 9, &e)),
    }

    let ix = &cfg.index;
    let mut prof = Table::new(&["path", "t", "raw_re", "raw_im", "density"]);
    let mut integ = Table::new(&["path", "flux", "integral_raw_re", "integral_raw_im", "integral", "xi_difference", "index"]);
    let ray = RaySpec::default();
    for i in 0..ix.paths.len() {
        let label = path_label(cfg, i);
        let expected = ix.paths[i].expected_index as f64;
        let (model, a, bb) = match cylinder(cfg, i) {
            Ok(m) => m,
            Err(e) => {
                checks.push(Check::error(format!("density.{label}"), 10, &e));
                continue;
            }
        };
        // transport along a segment crossing the ramp of the twisted cylinder
        match FlatOperatorSpec::cylinder(&model) {
            Ok((l, rr)) => {
                // inside the ramp, where the quadrature converges quickly
                let y = [0.4 * ix.duration, -0.2];
                let x = [0.575 * ix.duration, 0.4];
                for (side, s) in [("L", &l), ("R", &rr)] {
                    let name = format!("hadamard.transport.{label}.{side}");
                    match transport_residual(s, &x, &y, h.cylinder_k_max, h.samples) {
                        Ok(res) => checks.push(Check::new(name, 9, num(res), num(0.0), res, h.tolerance, Src::Exact)),
                        Err(e) => checks.push(Check::error(name, 9, &e)),
                    }
                }
            }
            Err(e) => checks.push(Check::error(format!("hadamard.transport.{label}"), 9, &e)),
        }
        if h.profile_points > 1 {
            for j in 0..h.profile_points {
                let t = model.t_minus + (model.t_plus - model.t_minus) * j as f64 / (h.profile_points - 1) as f64;
                if let Ok(v) = index_density(&model, &[t, 0.0]) {
                    prof.push(vec![json!(label), num(t), num(v.raw.re), num(v.raw.im), num(v.density)]);
                }
            }
        }
        let flux = bb - a;
        match integrated_index_density(&model) {
            Ok((raw, dens)) => {
                integ.push(vec![json!(label), num(flux), num(raw.re), num(raw.im), num(dens)]);
                let dev = (dens.abs() - flux.abs()).abs();
                checks.push(Check::new(format!("density.{label}.magnitude"), 10, num(dens.abs()), num(flux.abs()), dev, ix.density_tolerance, Src::Oracle));
                // ind = Xi_+ - Xi_- - int density
                let xi_diff = (|| -> Result<f64> {
                    let xp = eta_zeta(&model.operator_plus()?, ray)?.xi;
                    let xm = eta_zeta(&model.operator_minus()?, ray)?.xi;
                    Ok((xp - xm).re)
                })();
                match xi_diff {
                    Ok(xd) => {
                        if let Some(row) = integ.rows.last_mut() {
                            row.push(num(xd));
                            row.push(num(xd - dens));
                        }
                        let got = xd - dens;
                        checks.push(Check::new(format!("density.{label}.calibrated_sign"), 10, num(got), num(expected), (got - expected).abs(), ix.xi_tolerance, Src::Oracle));
                    }
                    Err(e) => checks.push(Check::error(format!("density.{label}.calibrated_sign"), 10, &e)),
                }
            }
            Err(e) => checks.push(Check::error(format!("density.{label}"), 10, &e)),
        }
    }
    (checks, tables(vec![("hadamard_diagonal", diag), ("index_density_profile", prof), ("index_density", integ)]))
}
