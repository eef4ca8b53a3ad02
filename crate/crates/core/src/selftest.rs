//! Seeded randomized suites exercising every part of the kernel. Suites run
//! sequentially off a single ChaCha8 stream, so a fixed seed fixes every
//! generated instance and the report is byte-identical across runs. Reports
//! carry no timings for the same reason.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::factor::{
    decide_equivalence, embed_factorization, lift_plot, witness_d1, witness_general,
    witness_point, Decision, FactorizationPair,
};
use crate::formal::{compose, FormalMorphism, FormalSpace};
use crate::hadamard::hadamard_expand;
use crate::jets::{
    cone_to_plot, disk_section_to_jet, jet_to_disk_section, lift_jet_plot, plot_to_cone, prolong,
    project, JetPoint, JetSpace, ProSystem, TruncatedProPlot,
};
use crate::monomial::{multi_indices_up_to, Monomial};
use crate::parse::parse_polynomial;
use crate::poly::Polynomial;
use crate::rational::{binomial, rat, rat_frac, Rational};
use crate::weil::WeilAlgebra;

pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Injectable defect for the negative-path check of the harness itself.
#[doc(hidden)]
#[derive(Clone, Copy, Debug)]
pub enum Fault {
    PerturbPhi,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub rng: &'static str,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn total_checks(&self) -> usize {
        self.suites.iter().map(|s| s.checks).sum()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("jetkernel selftest report\n");
        out.push_str(&format!("seed: {}\n", self.seed));
        out.push_str(&format!("rng: {}\n", self.rng));
        for s in &self.suites {
            match &s.failure {
                None => out.push_str(&format!("suite {}: pass ({} checks)\n", s.name, s.checks)),
                Some(why) => out.push_str(&format!(
                    "suite {}: FAIL after {} checks: {}\n",
                    s.name, s.checks, why
                )),
            }
        }
        let status = if self.passed() { "pass" } else { "fail" };
        out.push_str(&format!(
            "overall: {} ({} suites, {} checks)\n",
            status,
            self.suites.len(),
            self.total_checks()
        ));
        out
    }
}

pub const SUITE_NAMES: [&str; 8] = [
    "hadamard",
    "weil",
    "witness_d1",
    "witness_point",
    "witness_general",
    "decision",
    "lift_plot",
    "jets",
];

pub fn run(seed: u64) -> SelftestReport {
    run_with_fault(seed, None)
}

#[doc(hidden)]
pub fn run_with_fault(seed: u64, fault: Option<Fault>) -> SelftestReport {
    let suites = SUITE_NAMES
        .iter()
        .map(|name| run_suite(name, seed, fault))
        .collect();
    SelftestReport { seed, rng: RNG_ALGORITHM, suites }
}

/// Runs one suite on its own substream of the seed, so suites are stable
/// under reordering.
pub fn run_suite(name: &str, seed: u64, fault: Option<Fault>) -> SuiteResult {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ hash);
    let mut counter = Checks::new();
    let outcome = match name {
        "hadamard" => suite_hadamard(&mut rng, &mut counter),
        "weil" => suite_weil(&mut rng, &mut counter),
        "witness_d1" => suite_witness_d1(&mut rng, &mut counter, fault),
        "witness_point" => suite_witness_point(&mut rng, &mut counter),
        "witness_general" => suite_witness_general(&mut rng, &mut counter),
        "decision" => suite_decision(&mut rng, &mut counter),
        "lift_plot" => suite_lift_plot(&mut rng, &mut counter),
        "jets" => suite_jets(&mut rng, &mut counter),
        other => Err(format!("unknown suite {other}")),
    };
    let name = SUITE_NAMES
        .iter()
        .find(|n| **n == name)
        .copied()
        .unwrap_or("unknown");
    SuiteResult { name, checks: counter.count, failure: outcome.err() }
}

struct Checks {
    count: usize,
}

impl Checks {
    fn new() -> Self {
        Checks { count: 0 }
    }

    fn check(&mut self, ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
        if !ok {
            return Err(why());
        }
        self.count += 1;
        Ok(())
    }
}

fn p(s: &str) -> Polynomial {
    parse_polynomial(s).expect("fixed test expression")
}

fn rand_rational(rng: &mut ChaCha8Rng) -> Rational {
    let numer = loop {
        let n = rng.gen_range(-9i64..=9);
        if n != 0 {
            break n;
        }
    };
    rat_frac(numer, rng.gen_range(1i64..=3))
}

fn rand_monomial(rng: &mut ChaCha8Rng, vars: &[String], max_degree: u32) -> Monomial {
    let mut budget = rng.gen_range(0..=max_degree);
    let mut exps = Vec::new();
    for v in vars {
        if budget == 0 {
            break;
        }
        let e = rng.gen_range(0..=budget);
        if e > 0 {
            exps.push((v.clone(), e));
            budget -= e;
        }
    }
    Monomial::from_exps(exps)
}

fn rand_poly(rng: &mut ChaCha8Rng, vars: &[String], max_degree: u32, terms: usize) -> Polynomial {
    let picked: Vec<(Monomial, Rational)> = (0..terms)
        .map(|_| (rand_monomial(rng, vars, max_degree), rand_rational(rng)))
        .collect();
    Polynomial::from_terms(vars, picked)
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

fn suite_hadamard(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<(), String> {
    for i in 0..500 {
        let x_vars = names("x", rng.gen_range(1..=3));
        let y_vars = names("y", rng.gen_range(1..=3));
        let all: Vec<String> = x_vars.iter().chain(&y_vars).cloned().collect();
        let terms = rng.gen_range(1..=8);
        let f = rand_poly(rng, &all, 6, terms);
        for l in 0..=4 {
            let e = hadamard_expand(&f, &x_vars, &y_vars, l)
                .map_err(|e| format!("instance {i} order {l}: {e}"))?;
            c.check(e.reconstruct() == f, || {
                format!("instance {i} order {l}: reconstruction mismatch")
            })?;
        }
    }
    Ok(())
}

fn algebra_pool() -> Vec<WeilAlgebra> {
    vec![
        WeilAlgebra::disk(1, 1),
        WeilAlgebra::disk(1, 2),
        WeilAlgebra::disk(2, 2),
        WeilAlgebra::disk(3, 1),
        WeilAlgebra::new(
            "M",
            vec!["x".into(), "y".into()],
            vec![p("x^2"), p("x*y"), p("y^3")],
            8,
        )
        .expect("fixed mixed presentation"),
    ]
}

fn suite_weil(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<(), String> {
    for d in 1..=5usize {
        for k in 0..=5u32 {
            let disk = WeilAlgebra::disk(d, k);
            let expected = binomial(d as u64 + k as u64, d as u64) as usize;
            c.check(disk.dim() == expected, || format!("disk({d},{k}) dimension"))?;
        }
    }
    let pool = algebra_pool();
    for i in 0..500 {
        let a = &pool[rng.gen_range(0..pool.len())];
        let vars = a.vars().to_vec();
        let f = rand_poly(rng, &vars, 2 * a.k() + 1, 4);
        let g = rand_poly(rng, &vars, 2 * a.k() + 1, 4);
        let prod_then_nf = a.nf(&(&f * &g));
        let nf_then_prod = a.mul(&a.nf(&f), &a.nf(&g));
        c.check(prod_then_nf == nf_then_prod, || format!("instance {i}: nf is not multiplicative"))?;
        let sum_then_nf = a.nf(&(&f + &g));
        let nf_then_sum = a.add(&a.nf(&f), &a.nf(&g));
        c.check(sum_then_nf == nf_then_sum, || format!("instance {i}: nf is not additive"))?;
    }
    for i in 0..200 {
        let a = &pool[rng.gen_range(0..pool.len())];
        let vars = a.vars().to_vec();
        let mut member = Polynomial::zero();
        for h in a.generators() {
            member = &member + &(h * &rand_poly(rng, &vars, 2, 2));
        }
        let mu = a
            .ideal_decompose(&member)
            .map_err(|e| format!("instance {i}: constructed member rejected: {e}"))?;
        let mut recombined = Polynomial::zero();
        for (m, h) in mu.iter().zip(a.generators()) {
            recombined = &recombined + &(m * h);
        }
        c.check(recombined == member, || format!("instance {i}: decomposition not exact"))?;
    }
    for i in 0..50 {
        let a = &pool[rng.gen_range(0..3)];
        let b = &pool[rng.gen_range(0..3)];
        let (t, _) = a.tensor(b);
        c.check(t.dim() == a.dim() * b.dim(), || {
            format!("instance {i}: tensor dimension is not multiplicative")
        })?;
    }
    Ok(())
}

fn d1_source() -> FormalSpace {
    let algebra = WeilAlgebra::new("D", vec!["t".into()], vec![p("t^2")], 4)
        .expect("fixed presentation");
    FormalSpace::thickened_point(algebra)
}

fn suite_witness_d1(
    rng: &mut ChaCha8Rng,
    c: &mut Checks,
    fault: Option<Fault>,
) -> Result<(), String> {
    let disk = d1_source();
    let r4 = FormalSpace::standard_r(4);
    for i in 0..100 {
        let n = rng.gen_range(2..=3);
        let coords = names("v", n);
        let v = FormalSpace::cartesian("V", coords.clone()).expect("fresh coordinates");
        let rectified = i % 2 == 0;
        let (linear, offset): (Vec<Rational>, Vec<Rational>) = if rectified {
            (
                (0..n).map(|j| if j == 0 { rat(1) } else { rat(0) }).collect(),
                vec![rat(0); n],
            )
        } else {
            let mut linear: Vec<Rational> =
                (0..n).map(|_| rat(rng.gen_range(-2i64..=2))).collect();
            let slot = rng.gen_range(0..n);
            linear[slot] = rat([-2i64, -1, 1, 2][rng.gen_range(0..4)]);
            let offset = (0..n).map(|_| rat(rng.gen_range(-2i64..=2))).collect();
            (linear, offset)
        };
        let iota_comps: Vec<Polynomial> = (0..n)
            .map(|j| {
                &Polynomial::var("t").scale(&linear[j]) + &Polynomial::constant(offset[j].clone())
            })
            .collect();
        let iota = FormalMorphism::new(disk.clone(), v.clone(), iota_comps)
            .map_err(|e| format!("instance {i}: iota: {e}"))?;

        let f_comps: Vec<Polynomial> =
            (0..4).map(|_| rand_poly(rng, &coords, 5, 4)).collect();
        let f = FormalMorphism::new(v.clone(), r4.clone(), f_comps.clone())
            .map_err(|e| format!("instance {i}: f: {e}"))?;

        let slot = (0..n).find(|j| !linear[*j].is_zero()).expect("full-rank direction");
        let level = (&Polynomial::var(&coords[slot])
            - &Polynomial::constant(offset[slot].clone()))
            .scale(&(rat(1) / linear[slot].clone()));
        let square = &level * &level;
        let fp_comps: Vec<Polynomial> = f_comps
            .iter()
            .map(|fk| fk + &(&square * &rand_poly(rng, &coords, 2, 2)))
            .collect();
        let f_prime = FormalMorphism::new(v.clone(), r4.clone(), fp_comps)
            .map_err(|e| format!("instance {i}: f': {e}"))?;

        let mut span = witness_d1(&iota, &f, &iota, &f_prime)
            .map_err(|e| format!("instance {i}: {e}"))?;
        if i == 0 {
            if let Some(Fault::PerturbPhi) = fault {
                let broken: Vec<Polynomial> = span
                    .phi
                    .component_polys()
                    .iter()
                    .enumerate()
                    .map(|(k, q)| if k == 0 { q + &p("1") } else { q.clone() })
                    .collect();
                span.phi =
                    FormalMorphism::new(span.phi.source().clone(), span.phi.target().clone(), broken)
                        .expect("perturbed phi is still a morphism");
            }
        }
        span.verify(&iota, &f, &iota, &f_prime)
            .map_err(|e| format!("instance {i}: {e}"))?;
        c.check(true, String::new)?;
    }

    let (pair, pair_prime) = d1_worked_pairs();
    let span = witness_d1(pair.iota(), pair.f(), pair_prime.iota(), pair_prime.f())
        .map_err(|e| format!("patterned instance: {e}"))?;
    c.check(span.delta == vec![p("t^2")], || "patterned instance: delta".into())?;
    c.check(span.mu == vec![vec![p("1")]], || "patterned instance: mu".into())?;
    Ok(())
}

fn d1_worked_pairs() -> (FactorizationPair, FactorizationPair) {
    let disk = d1_source();
    let v = FormalSpace::cartesian("V", vec!["t".into(), "x".into()]).expect("fixed");
    let r1 = FormalSpace::standard_r(1);
    let iota =
        FormalMorphism::new(disk.clone(), v.clone(), vec![p("t"), p("0")]).expect("fixed");
    let f = FormalMorphism::new(v.clone(), r1.clone(), vec![p("t + x")]).expect("fixed");
    let f_prime =
        FormalMorphism::new(v.clone(), r1, vec![p("t + x + t^2")]).expect("fixed");
    (
        FactorizationPair::new(iota.clone(), f).expect("fixed"),
        FactorizationPair::new(iota, f_prime).expect("fixed"),
    )
}

/// Rectified iota out of the given source into fresh coordinates, with p
/// extra fiber slots, together with the slot names.
fn rectified_iota(
    source: &FormalSpace,
    extra: usize,
) -> (FormalMorphism, FormalSpace, Vec<String>) {
    let src = source.coords();
    let mut coords = names("w", src.len() + extra);
    coords.truncate(src.len() + extra);
    let v = FormalSpace::cartesian("V", coords.clone()).expect("fresh coordinates");
    let mut comps: Vec<Polynomial> = src.iter().map(|s| Polynomial::var(s)).collect();
    comps.extend(std::iter::repeat(Polynomial::zero()).take(extra));
    let iota = FormalMorphism::new(source.clone(), v.clone(), comps).expect("standard inclusion");
    (iota, v, coords)
}

/// f' = f + sum_i H_i r_i with H_i the generator h_i written in the
/// epsilon slots of V. With force_param set, component 0 instead gets
/// exactly H_0 times that parameter, so the decomposition row for it must
/// mention the parameter.
fn perturb_along_ideal(
    rng: &mut ChaCha8Rng,
    source: &FormalSpace,
    coords: &[String],
    f_comps: &[Polynomial],
    parameter_degree: u32,
    force_param: Option<&str>,
) -> Vec<Polynomial> {
    let slot_map: BTreeMap<String, String> = source
        .eps()
        .iter()
        .enumerate()
        .map(|(j, e)| (e.clone(), coords[source.params().len() + j].clone()))
        .collect();
    let lifted: Vec<Polynomial> = source
        .thickening()
        .generators()
        .iter()
        .map(|h| h.rename_vars(&slot_map))
        .collect();
    f_comps
        .iter()
        .enumerate()
        .map(|(k, fk)| {
            if k == 0 {
                if let Some(u) = force_param {
                    return fk + &(&lifted[0] * &Polynomial::var(u));
                }
            }
            let mut out = fk.clone();
            for h in &lifted {
                if rng.gen_bool(0.7) {
                    out = &out + &(h * &rand_poly(rng, coords, parameter_degree, 2));
                }
            }
            out
        })
        .collect()
}

fn suite_witness_point(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<(), String> {
    let pool = vec![
        WeilAlgebra::disk(1, 2),
        WeilAlgebra::disk(2, 2),
        WeilAlgebra::new(
            "M",
            vec!["x".into(), "y".into()],
            vec![p("x^2"), p("x*y"), p("y^3")],
            8,
        )
        .expect("fixed mixed presentation"),
    ];
    for i in 0..100 {
        let algebra = pool[i % pool.len()].clone();
        let source = FormalSpace::thickened_point(algebra);
        let (iota, v, coords) = rectified_iota(&source, rng.gen_range(1..=2));
        let plot_len = rng.gen_range(2..=3);
        let target = FormalSpace::standard_r(plot_len);
        let f_comps: Vec<Polynomial> =
            (0..plot_len).map(|_| rand_poly(rng, &coords, 4, 4)).collect();
        let f = FormalMorphism::new(v.clone(), target.clone(), f_comps.clone())
            .map_err(|e| format!("instance {i}: f: {e}"))?;
        let fp_comps = perturb_along_ideal(rng, &source, &coords, &f_comps, 2, None);
        let f_prime = FormalMorphism::new(v.clone(), target, fp_comps)
            .map_err(|e| format!("instance {i}: f': {e}"))?;
        let span = witness_point(&iota, &f, &iota, &f_prime)
            .map_err(|e| format!("instance {i}: {e}"))?;
        span.verify(&iota, &f, &iota, &f_prime)
            .map_err(|e| format!("instance {i}: {e}"))?;
        c.check(true, String::new)?;
    }

    // degree-1 perturbation is outside the ideal
    let source = FormalSpace::thickened_point(WeilAlgebra::disk(1, 2));
    let (iota, v, coords) = rectified_iota(&source, 1);
    let r1 = FormalSpace::standard_r(1);
    let f = FormalMorphism::new(v.clone(), r1.clone(), vec![p(&coords[0])])
        .expect("linear plot");
    let f_prime = FormalMorphism::new(v.clone(), r1, vec![&p(&coords[0]) + &p(&coords[0])])
        .expect("perturbed plot");
    match witness_point(&iota, &f, &iota, &f_prime) {
        Err(crate::error::KernelError::NotInIdeal { .. }) => {
            c.check(true, String::new)?;
        }
        other => {
            return Err(format!(
                "degree-1 perturbation should fail with not-in-ideal, got {other:?}"
            ));
        }
    }
    Ok(())
}

fn suite_witness_general(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<(), String> {
    for i in 0..50 {
        let q = 1 + i % 2;
        let algebra = if i % 3 == 0 {
            WeilAlgebra::disk(1, 2)
        } else {
            WeilAlgebra::disk(1, 1)
        };
        let source = FormalSpace::new("UxD", names("u", q), algebra)
            .map_err(|e| format!("instance {i}: source: {e}"))?;
        let (iota, v, coords) = rectified_iota(&source, rng.gen_range(1..=2));
        let plot_len = rng.gen_range(1..=3);
        let target = FormalSpace::standard_r(plot_len);
        let f_comps: Vec<Polynomial> =
            (0..plot_len).map(|_| rand_poly(rng, &coords, 4, 4)).collect();
        let f = FormalMorphism::new(v.clone(), target.clone(), f_comps.clone())
            .map_err(|e| format!("instance {i}: f: {e}"))?;
        let force = if i % 2 == 0 { Some(coords[0].as_str()) } else { None };
        let fp_comps = perturb_along_ideal(rng, &source, &coords, &f_comps, 3, force);
        let f_prime = FormalMorphism::new(v.clone(), target, fp_comps)
            .map_err(|e| format!("instance {i}: f': {e}"))?;
        let span = witness_general(&iota, &f, &iota, &f_prime)
            .map_err(|e| format!("instance {i}: {e}"))?;
        span.verify(&iota, &f, &iota, &f_prime)
            .map_err(|e| format!("instance {i}: {e}"))?;
        if force.is_some() {
            let parameterized = span.mu[0]
                .iter()
                .any(|m| m.occurring_vars().contains("u1"));
            c.check(parameterized, || {
                format!("instance {i}: mu row 0 should depend on the parameter u1")
            })?;
        } else {
            c.check(true, String::new)?;
        }
    }

    // the two code paths agree on the first-order one-variable disk
    let (pair, pair_prime) = d1_worked_pairs();
    let a = witness_d1(pair.iota(), pair.f(), pair_prime.iota(), pair_prime.f())
        .map_err(|e| format!("cross-path d1: {e}"))?;
    let b = witness_point(pair.iota(), pair.f(), pair_prime.iota(), pair_prime.f())
        .map_err(|e| format!("cross-path point: {e}"))?;
    c.check(
        a.phi.component_polys() == b.phi.component_polys()
            && a.delta == b.delta
            && a.mu == b.mu
            && a.h == b.h,
        || "cross-path disagreement between witness_d1 and witness_point".into(),
    )?;
    Ok(())
}

fn random_source(rng: &mut ChaCha8Rng, i: usize) -> FormalSpace {
    let algebra = match i % 3 {
        0 => WeilAlgebra::disk(1, 1),
        1 => WeilAlgebra::disk(1, 2),
        _ => WeilAlgebra::disk(2, 1),
    };
    let q = rng.gen_range(0..=1);
    if q == 0 {
        FormalSpace::thickened_point(algebra)
    } else {
        FormalSpace::new("UxD", names("u", q), algebra).expect("fresh parameter names")
    }
}

/// A second factorization of the same plot: the lift pair padded with a
/// junk coordinate that f ignores.
fn padded_factorization(
    rng: &mut ChaCha8Rng,
    plot: &FormalMorphism,
) -> Result<FactorizationPair, String> {
    let source = plot.source();
    let mut coords = source.coords();
    coords.push("pad".into());
    let v = FormalSpace::cartesian("Vpad", coords).map_err(|e| e.to_string())?;
    let mut comps: Vec<Polynomial> =
        source.coords().iter().map(|s| Polynomial::var(s)).collect();
    comps.push(rand_poly(rng, &source.coords(), 2, 2));
    let iota = FormalMorphism::new(source.clone(), v.clone(), comps).map_err(|e| e.to_string())?;
    let f = FormalMorphism::new(v, plot.target().clone(), plot.component_polys())
        .map_err(|e| e.to_string())?;
    FactorizationPair::new(iota, f).map_err(|e| e.to_string())
}

fn suite_decision(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<(), String> {
    for i in 0..100 {
        let source = random_source(rng, i);
        let plot_len = rng.gen_range(1..=3);
        let target = FormalSpace::standard_r(plot_len);
        let comps: Vec<Polynomial> = (0..plot_len)
            .map(|_| rand_poly(rng, &source.coords(), 3, 3))
            .collect();
        let plot = FormalMorphism::new(source.clone(), target, comps)
            .map_err(|e| format!("instance {i}: plot: {e}"))?;
        let left = lift_plot(&plot).map_err(|e| format!("instance {i}: lift: {e}"))?;
        let right = match i % 3 {
            0 => padded_factorization(rng, &plot).map_err(|e| format!("instance {i}: {e}"))?,
            1 => {
                let (hat, _) =
                    embed_factorization(&left).map_err(|e| format!("instance {i}: {e}"))?;
                hat
            }
            _ => left.clone(),
        };
        match decide_equivalence(&left, &right) {
            Ok(Decision::Equivalent(chain)) => {
                chain
                    .verify()
                    .map_err(|e| format!("instance {i}: chain fails to verify: {e}"))?;
                c.check(true, String::new)?;
            }
            Ok(Decision::NotEquivalent { component }) => {
                return Err(format!(
                    "instance {i}: misclassified as not-equivalent at component {component}"
                ));
            }
            Err(e) => return Err(format!("instance {i}: {e}")),
        }

        let slot = rng.gen_range(0..plot_len);
        let broken_f = FormalMorphism::new(
            right.f().source().clone(),
            right.f().target().clone(),
            pad_components(right.f(), slot),
        )
        .map_err(|e| format!("instance {i}: perturbed f: {e}"))?;
        let perturbed = FactorizationPair::new(right.iota().clone(), broken_f)
            .map_err(|e| format!("instance {i}: perturbed pair: {e}"))?;
        match decide_equivalence(&left, &perturbed) {
            Ok(Decision::NotEquivalent { .. }) => c.check(true, String::new)?,
            Ok(Decision::Equivalent(_)) => {
                return Err(format!("instance {i}: perturbed pair misclassified as equivalent"));
            }
            Err(e) => return Err(format!("instance {i}: perturbed decision: {e}")),
        }
    }
    Ok(())
}

fn pad_components(f: &FormalMorphism, slot: usize) -> Vec<Polynomial> {
    f.component_polys()
        .iter()
        .enumerate()
        .map(|(k, q)| if k == slot { q + &p("1") } else { q.clone() })
        .collect()
}

fn suite_lift_plot(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<(), String> {
    let target = FormalSpace::standard_r(8);
    for i in 0..200 {
        let source = random_source(rng, i);
        let comps: Vec<Polynomial> = (0..8)
            .map(|_| rand_poly(rng, &source.coords(), 4, 3))
            .collect();
        let plot = FormalMorphism::new(source, target.clone(), comps)
            .map_err(|e| format!("instance {i}: plot: {e}"))?;
        let pair = lift_plot(&plot).map_err(|e| format!("instance {i}: {e}"))?;
        c.check(pair.composite().components() == plot.components(), || {
            format!("instance {i}: composite does not reproduce the plot")
        })?;
    }
    Ok(())
}

fn random_jet_values(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    k: u32,
) -> BTreeMap<(usize, Vec<u32>), Rational> {
    let mut values = BTreeMap::new();
    for a in 1..=m {
        for sigma in multi_indices_up_to(n, k) {
            values.insert((a, sigma), rand_rational(rng));
        }
    }
    values
}

fn suite_jets(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<(), String> {
    for i in 0..30 {
        let n = rng.gen_range(1..=2);
        let m = rng.gen_range(1..=2);
        let x_vars = names("x", n);
        let sections: Vec<Polynomial> =
            (0..m).map(|_| rand_poly(rng, &x_vars, 4, 4)).collect();
        let base: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-2i64..=2))).collect();
        for k in 1..=4u32 {
            let jet = prolong(&sections, &x_vars, k, &base)
                .map_err(|e| format!("instance {i} order {k}: {e}"))?;
            let lower = prolong(&sections, &x_vars, k - 1, &base)
                .map_err(|e| format!("instance {i} order {}: {e}", k - 1))?;
            let projected =
                project(&jet).map_err(|e| format!("instance {i} order {k}: {e}"))?;
            c.check(projected == lower, || {
                format!("instance {i}: projection does not commute with prolongation at {k}")
            })?;
        }
    }

    for i in 0..200 {
        let n = rng.gen_range(1..=2);
        let m = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=3u32);
        let disk = WeilAlgebra::disk(n, k);
        let jet = JetPoint::new(n, m, k, vec![rat(0); n], random_jet_values(rng, n, m, k))
            .map_err(|e| format!("instance {i}: {e}"))?;
        let secs = jet_to_disk_section(&jet, &disk).map_err(|e| format!("instance {i}: {e}"))?;
        let back = disk_section_to_jet(&disk, &secs).map_err(|e| format!("instance {i}: {e}"))?;
        c.check(back == jet, || format!("instance {i}: disk section roundtrip"))?;
    }

    for i in 0..100 {
        let source = random_source(rng, i);
        let n = rng.gen_range(1..=2);
        let m = rng.gen_range(1..=2);
        let top_k = rng.gen_range(1..=3u32);
        let system = ProSystem::Jet { n, m };
        let top_space = JetSpace { n, m, k: top_k }.space();
        let comps: Vec<Polynomial> = top_space
            .coords()
            .iter()
            .map(|_| rand_poly(rng, &source.coords(), 3, 2))
            .collect();
        let top = FormalMorphism::new(source.clone(), top_space, comps)
            .map_err(|e| format!("instance {i}: top: {e}"))?;
        let cone = plot_to_cone(system, &top).map_err(|e| format!("instance {i}: {e}"))?;
        cone.verify_compatible()
            .map_err(|e| format!("instance {i}: constructed cone incompatible: {e}"))?;
        let flat = cone_to_plot(&cone).map_err(|e| format!("instance {i}: {e}"))?;
        c.check(flat == top, || {
            format!("instance {i}: cone does not flatten back to its top")
        })?;
        let again = plot_to_cone(system, &flat).map_err(|e| format!("instance {i}: {e}"))?;
        c.check(again == cone, || format!("instance {i}: plot does not rebuild its cone"))?;

        if i < 20 {
            let mut levels = cone.levels().to_vec();
            let low = 0;
            let broken_comps: Vec<Polynomial> = levels[low]
                .component_polys()
                .iter()
                .enumerate()
                .map(|(j, q)| if j == 0 { q + &p("1") } else { q.clone() })
                .collect();
            levels[low] = FormalMorphism::new(
                levels[low].source().clone(),
                levels[low].target().clone(),
                broken_comps,
            )
            .map_err(|e| format!("instance {i}: broken level: {e}"))?;
            let broken = TruncatedProPlot::new(system, source.clone(), levels)
                .map_err(|e| format!("instance {i}: broken cone: {e}"))?;
            c.check(broken.verify_compatible().is_err(), || {
                format!("instance {i}: injected incompatibility went unnoticed")
            })?;
        }
    }

    for i in 0..50 {
        let source = random_source(rng, i);
        let n = 1;
        let m = rng.gen_range(1..=2);
        let top_k = 3u32;
        let system = ProSystem::Jet { n, m };
        let top_space = JetSpace { n, m, k: top_k }.space();
        let comps: Vec<Polynomial> = top_space
            .coords()
            .iter()
            .map(|_| rand_poly(rng, &source.coords(), 3, 2))
            .collect();
        let top = FormalMorphism::new(source.clone(), top_space, comps)
            .map_err(|e| format!("instance {i}: top: {e}"))?;
        let cone = plot_to_cone(system, &top).map_err(|e| format!("instance {i}: {e}"))?;
        let lift = lift_jet_plot(&cone).map_err(|e| format!("instance {i}: {e}"))?;
        let top_names = lift.through.target().coords();
        let through_polys = lift.through.component_polys();
        for (level, plot) in cone.levels().iter().enumerate() {
            let comps: Vec<Polynomial> = plot
                .target()
                .coords()
                .iter()
                .map(|c| {
                    let at = top_names.iter().position(|t| t == c).expect("jet coords nest");
                    through_polys[at].clone()
                })
                .collect();
            let through_level =
                FormalMorphism::new(lift.space.clone(), plot.target().clone(), comps)
                    .map_err(|e| format!("instance {i} level {level}: {e}"))?;
            let composite = compose(&through_level, &lift.iota)
                .map_err(|e| format!("instance {i} level {level}: {e}"))?;
            c.check(composite.components() == plot.components(), || {
                format!("instance {i}: lift composite differs at level {level}")
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_reports_are_byte_identical() {
        let a = run(7);
        let b = run(7);
        assert_eq!(a.render_text(), b.render_text());
        assert!(a.passed(), "\n{}", a.render_text());
    }

    #[test]
    fn different_seeds_still_pass() {
        for seed in [1u64, 2] {
            let report = run(seed);
            assert!(report.passed(), "seed {seed}:\n{}", report.render_text());
        }
    }

    #[test]
    fn injected_fault_names_the_identity() {
        let report = run_with_fault(42, Some(Fault::PerturbPhi));
        assert!(!report.passed());
        let suite = report.suites.iter().find(|s| s.name == "witness_d1").unwrap();
        let failure = suite.failure.as_ref().expect("fault must surface");
        assert!(failure.contains("phi_alpha_eq_f"), "failure was: {failure}");
        assert!(report.render_text().contains("overall: fail"));
    }
}
