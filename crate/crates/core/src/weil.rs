//! Weil algebras presented as quotients Q[e_1..e_d]/I with I nilpotent. The
//! constructor runs Buchberger on the presentation, scans for the order of
//! nilpotency, and enumerates the standard-monomial basis, so a constructed
//! value always is a genuine Weil algebra: finite dimensional, with 1 in the
//! basis and every variable nilpotent. Elements are kept in normal form;
//! parameter variables foreign to the presentation pass through as
//! coefficients, which is what makes parameterized computations (families
//! over a base) work on the same code path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;

use crate::error::{KernelError, Result};
use crate::groebner::{GroebnerBasis, DEFAULT_PAIR_CAP};
use crate::monomial::{monomial_from_index, multi_indices_of_degree, multi_indices_up_to, Monomial};
use crate::poly::Polynomial;
use crate::rational::Rational;

/// Default bound for the nilpotency scan in [`WeilAlgebra::new`].
pub const DEFAULT_K_MAX: u32 = 32;

/// Reads the Buchberger pair cap, honoring the JETKERNEL_PAIR_CAP override.
pub fn pair_cap() -> usize {
    static CAP: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("JETKERNEL_PAIR_CAP")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_PAIR_CAP)
    })
}

#[derive(Clone, Debug)]
pub struct WeilAlgebra {
    name: String,
    vars: Vec<String>,
    ideal: GroebnerBasis,
    k: u32,
    basis: Vec<Monomial>,
}

/// An element of a Weil algebra, held in normal form. Construct through the
/// algebra's methods so the invariant holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeilElement {
    value: Polynomial,
}

impl WeilElement {
    pub fn value(&self) -> &Polynomial {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

impl fmt::Display for WeilElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl PartialEq for WeilAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.ideal.generators() == other.ideal.generators()
    }
}

impl Eq for WeilAlgebra {}

impl WeilAlgebra {
    /// Builds Q[vars]/(generators), scanning k = 0.. for the order of
    /// nilpotency. Fails with a not-nilpotent error (naming a witness
    /// monomial) when no k <= k_max works, and rejects presentations whose
    /// ideal contains 1.
    pub fn new(
        name: impl Into<String>,
        vars: Vec<String>,
        generators: Vec<Polynomial>,
        k_max: u32,
    ) -> Result<Self> {
        {
            let mut seen = BTreeSet::new();
            for v in &vars {
                if !seen.insert(v) {
                    return Err(KernelError::invalid(format!("duplicate variable {v}")));
                }
            }
        }
        let ideal = GroebnerBasis::new(generators, vars.clone(), pair_cap())?;
        if ideal.basis().len() == 1 && ideal.basis()[0].is_constant() {
            return Err(KernelError::UnitIdeal);
        }
        let mut order_k = None;
        'scan: for k in 0..=k_max {
            for sigma in multi_indices_of_degree(vars.len(), k + 1) {
                let m = monomial_from_index(&vars, &sigma);
                let nf = ideal.reduce(&Polynomial::term(Rational::one(), m)).remainder;
                if !nf.is_zero() {
                    if k == k_max {
                        return Err(KernelError::NotNilpotent {
                            monomial: monomial_from_index(&vars, &sigma).to_string(),
                            k_max,
                        });
                    }
                    continue 'scan;
                }
            }
            order_k = Some(k);
            break;
        }
        let k = order_k.ok_or(KernelError::NotNilpotent {
            monomial: format!("some monomial of degree {}", k_max + 1),
            k_max,
        })?;

        let grevlex = ideal.order();
        let lead_monomials: Vec<Monomial> = ideal
            .basis()
            .iter()
            .map(|b| b.leading(&grevlex).expect("basis elements are nonzero").0.clone())
            .collect();
        let mut basis: Vec<Monomial> = multi_indices_up_to(vars.len(), k)
            .into_iter()
            .map(|sigma| monomial_from_index(&vars, &sigma))
            .filter(|m| !lead_monomials.iter().any(|l| l.divides(m)))
            .collect();
        basis.sort_by(|a, b| grevlex.cmp(a, b));
        Ok(WeilAlgebra { name: name.into(), vars, ideal, k, basis })
    }

    /// The k-th order infinitesimal disk in d dimensions: variables e1..ed
    /// modulo all monomials of degree k+1.
    pub fn disk(d: usize, k: u32) -> Self {
        let vars: Vec<String> = (1..=d).map(|i| format!("e{i}")).collect();
        let generators: Vec<Polynomial> = multi_indices_of_degree(d, k + 1)
            .into_iter()
            .map(|sigma| Polynomial::term(Rational::one(), monomial_from_index(&vars, &sigma)))
            .collect();
        WeilAlgebra::new(format!("D{d}({k})"), vars, generators, k.max(1))
            .expect("disks are Weil algebras")
    }

    /// The one-point algebra Q, the disk of dimension 0.
    pub fn point() -> Self {
        WeilAlgebra::disk(0, 0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn d(&self) -> usize {
        self.vars.len()
    }

    /// Order of nilpotency: least k with V^(k+1) = 0.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Standard monomial basis, ascending grevlex, 1 first.
    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn ideal(&self) -> &GroebnerBasis {
        &self.ideal
    }

    pub fn generators(&self) -> &[Polynomial] {
        self.ideal.generators()
    }

    pub fn is_point(&self) -> bool {
        self.vars.is_empty()
    }

    /// Rebuilds the algebra with variables renamed through `map`.
    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> WeilAlgebra {
        let vars: Vec<String> = self
            .vars
            .iter()
            .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
            .collect();
        let generators: Vec<Polynomial> =
            self.generators().iter().map(|g| g.rename_vars(map)).collect();
        WeilAlgebra::new(self.name.clone(), vars, generators, self.k.max(1))
            .expect("renaming preserves the algebra")
    }

    /// Tensor product over Q. Colliding variables of `other` are renamed by
    /// appending primes; the returned map records the renaming.
    pub fn tensor(&self, other: &WeilAlgebra) -> (WeilAlgebra, BTreeMap<String, String>) {
        self.tensor_avoiding(other, &BTreeSet::new())
    }

    /// Tensor with extra names to avoid, for callers that manage a larger
    /// namespace (products of spaces with parameters).
    pub fn tensor_avoiding(
        &self,
        other: &WeilAlgebra,
        reserved: &BTreeSet<String>,
    ) -> (WeilAlgebra, BTreeMap<String, String>) {
        let mut taken: BTreeSet<String> = self.vars.iter().cloned().collect();
        taken.extend(reserved.iter().cloned());
        let mut renames = BTreeMap::new();
        for v in &other.vars {
            let fresh = fresh_name(v, &taken);
            taken.insert(fresh.clone());
            if fresh != *v {
                renames.insert(v.clone(), fresh);
            }
        }
        let other = other.rename_vars(&renames);
        let vars: Vec<String> = self.vars.iter().chain(other.vars.iter()).cloned().collect();
        let generators: Vec<Polynomial> = self
            .generators()
            .iter()
            .chain(other.generators().iter())
            .cloned()
            .collect();
        let k_max = self.k + other.k;
        let algebra = WeilAlgebra::new(
            format!("{}*{}", self.name, other.name),
            vars,
            generators,
            k_max.max(1),
        )
        .expect("tensor of Weil algebras is a Weil algebra");
        debug_assert_eq!(algebra.dim(), self.dim() * other.dim());
        debug_assert_eq!(algebra.k(), self.k + other.k);
        (algebra, renames)
    }

    /// The canonical normal form of p modulo the ideal, parameters as
    /// coefficients.
    pub fn nf(&self, p: &Polynomial) -> WeilElement {
        WeilElement { value: self.ideal.reduce(p).remainder }
    }

    pub fn zero(&self) -> WeilElement {
        WeilElement { value: Polynomial::zero() }
    }

    pub fn one(&self) -> WeilElement {
        WeilElement { value: Polynomial::constant(Rational::one()) }
    }

    pub fn add(&self, a: &WeilElement, b: &WeilElement) -> WeilElement {
        // normal forms are closed under addition
        WeilElement { value: &a.value + &b.value }
    }

    pub fn sub(&self, a: &WeilElement, b: &WeilElement) -> WeilElement {
        WeilElement { value: &a.value - &b.value }
    }

    pub fn mul(&self, a: &WeilElement, b: &WeilElement) -> WeilElement {
        self.nf(&(&a.value * &b.value))
    }

    pub fn scale(&self, c: &Rational, a: &WeilElement) -> WeilElement {
        WeilElement { value: a.value.scale(c) }
    }

    /// Writes p = sum(mu_i * h_i) over the original generators h. Errors
    /// with the nonzero remainder when p is not in the (extended) ideal.
    pub fn ideal_decompose(&self, p: &Polynomial) -> Result<Vec<Polynomial>> {
        let (mu, remainder) = self.ideal.reduce_over_generators(p);
        if !remainder.is_zero() {
            return Err(KernelError::NotInIdeal { remainder: remainder.to_string() });
        }
        Ok(mu)
    }

    /// Splits a normal form into coefficients over the standard basis: the
    /// entry at position i is the parameter polynomial multiplying basis
    /// monomial i. Exact: recombining gives back the element.
    pub fn basis_coefficients(&self, e: &WeilElement) -> Vec<Polynomial> {
        let index: BTreeMap<&Monomial, usize> =
            self.basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut out = vec![Polynomial::zero(); self.basis.len()];
        for (m, c) in e.value.terms() {
            let eps_part = Monomial::from_exps(
                m.iter()
                    .filter(|(v, _)| self.vars.iter().any(|w| w == v))
                    .map(|(v, k)| (v.to_string(), k)),
            );
            let param_part = Monomial::from_exps(
                m.iter()
                    .filter(|(v, _)| !self.vars.iter().any(|w| w == v))
                    .map(|(v, k)| (v.to_string(), k)),
            );
            let i = *index
                .get(&eps_part)
                .expect("normal form terms factor over standard monomials");
            out[i] = &out[i] + &Polynomial::term(c.clone(), param_part);
        }
        out
    }

    /// Zero constant-and-parameter part, i.e. the element lies in the
    /// nilpotent ideal (extended by parameters).
    pub fn is_nilpotent_element(&self, e: &WeilElement) -> bool {
        e.value
            .terms()
            .keys()
            .all(|m| self.vars.iter().any(|v| m.exp(v) > 0))
    }
}

/// First name not in `taken`: the candidate itself, then with primes
/// appended.
pub fn fresh_name(candidate: &str, taken: &BTreeSet<String>) -> String {
    let mut name = candidate.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_polynomial;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn algebra(vars: &[&str], gens: &[&str]) -> WeilAlgebra {
        WeilAlgebra::new(
            "test",
            vars.iter().map(|s| s.to_string()).collect(),
            gens.iter().map(|s| p(s)).collect(),
            DEFAULT_K_MAX,
        )
        .unwrap()
    }

    #[test]
    fn first_order_disk_in_one_variable() {
        let a = algebra(&["x"], &["x^2"]);
        assert_eq!(a.k(), 1);
        assert_eq!(a.dim(), 2);
        let names: Vec<String> = a.basis().iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["1", "x"]);
    }

    #[test]
    fn disks_have_binomial_dimension() {
        let d22 = WeilAlgebra::disk(2, 2);
        assert_eq!(d22.dim(), 6);
        assert_eq!(d22.k(), 2);
        // oracle: count monomials of degree <= k in d variables directly
        assert_eq!(multi_indices_up_to(2, 2).len(), 6);
        assert_eq!(WeilAlgebra::disk(3, 2).dim(), 10);
        assert_eq!(multi_indices_up_to(3, 2).len(), 10);
        let point = WeilAlgebra::disk(0, 3);
        assert_eq!(point.dim(), 1);
        assert_eq!(point.k(), 0);
    }

    #[test]
    fn non_nilpotent_presentations_are_rejected() {
        let err = WeilAlgebra::new("bad", vec!["x".into()], vec![p("x - 1")], 4).unwrap_err();
        match err {
            KernelError::NotNilpotent { k_max, .. } => assert_eq!(k_max, 4),
            other => panic!("expected not-nilpotent, got {other}"),
        }
        // unconstrained variable
        assert!(matches!(
            WeilAlgebra::new("bad", vec!["x".into(), "y".into()], vec![p("x^2")], 4),
            Err(KernelError::NotNilpotent { .. })
        ));
        // ideal containing 1
        assert_eq!(
            WeilAlgebra::new("bad", vec!["x".into()], vec![p("x"), p("x - 1")], 4).unwrap_err(),
            KernelError::UnitIdeal
        );
    }

    #[test]
    fn normal_forms() {
        let a = algebra(&["x"], &["x^2"]);
        let sq = a.nf(&p("1 + 2*x + x^2"));
        assert_eq!(sq.value(), &p("1 + 2*x"));
        // parameters ride along as coefficients
        assert_eq!(a.nf(&p("u*x + x^3")).value(), &p("u*x"));
        // the homomorphism property nf(p*q) = nf(nf(p)*nf(q))
        let f = p("1 + x");
        let g = p("u + x");
        assert_eq!(
            a.nf(&(&f * &g)),
            a.mul(&a.nf(&f), &a.nf(&g))
        );
    }

    #[test]
    fn mixed_presentation() {
        // Q[x,y]/(x^2, x*y, y^3): dimension 4, order 2
        let a = algebra(&["x", "y"], &["x^2", "x*y", "y^3"]);
        assert_eq!(a.dim(), 4);
        assert_eq!(a.k(), 2);
        let names: Vec<String> = a.basis().iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["1", "y", "x", "y^2"]);
        assert!(a.nf(&p("x*y + y^3")).is_zero());
    }

    #[test]
    fn tensor_multiplies_dimensions() {
        let d11 = WeilAlgebra::disk(1, 1);
        let (sq, renames) = d11.tensor(&d11);
        assert_eq!(sq.dim(), 4);
        assert_eq!(sq.k(), 2);
        assert_eq!(renames.get("e1").unwrap(), "e1'");
        let names: Vec<String> = sq.basis().iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["1", "e1'", "e1", "e1*e1'"]);

        let (t, _) = WeilAlgebra::disk(1, 1).tensor(&WeilAlgebra::disk(1, 2));
        assert_eq!(t.dim(), 6);
        assert_eq!(t.k(), 3);

        // tensoring with the point changes nothing but the name
        let (same, _) = d11.tensor(&WeilAlgebra::point());
        assert_eq!(same.dim(), 2);
        assert_eq!(same.vars(), d11.vars());
    }

    #[test]
    fn ideal_decomposition_over_original_generators() {
        let a = algebra(&["t"], &["t^2"]);
        let mu = a.ideal_decompose(&p("u*t^2 + t^4")).unwrap();
        assert_eq!(mu, vec![p("u + t^2")]);
        // roundtrip is exact
        let mut acc = Polynomial::zero();
        for (m, h) in mu.iter().zip(a.generators()) {
            acc = &acc + &(m * h);
        }
        assert_eq!(acc, p("u*t^2 + t^4"));

        let err = a.ideal_decompose(&p("t + t^2")).unwrap_err();
        assert_eq!(err, KernelError::NotInIdeal { remainder: "t".into() });
    }

    #[test]
    fn decomposition_respects_scaled_generators() {
        let a = algebra(&["t"], &["2*t^2"]);
        let mu = a.ideal_decompose(&p("t^2")).unwrap();
        assert_eq!(mu, vec![p("1/2")]);
    }

    #[test]
    fn basis_coefficient_split() {
        let a = algebra(&["x", "y"], &["x^2", "x*y", "y^3"]);
        let e = a.nf(&p("3 + u*x + y^2 - 2*x"));
        let coeffs = a.basis_coefficients(&e);
        // basis order is [1, y, x, y^2]
        assert_eq!(coeffs[0], p("3"));
        assert_eq!(coeffs[1], Polynomial::zero());
        assert_eq!(coeffs[2], p("u - 2"));
        assert_eq!(coeffs[3], p("1"));
        assert!(!a.is_nilpotent_element(&e));
        assert!(a.is_nilpotent_element(&a.nf(&p("u*x + y"))));
    }

    #[test]
    fn fresh_names_append_primes() {
        let taken: BTreeSet<String> = ["x".to_string(), "x'".to_string()].into();
        assert_eq!(fresh_name("x", &taken), "x''");
        assert_eq!(fresh_name("y", &taken), "y");
    }
}
