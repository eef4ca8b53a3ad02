//! Multivariate polynomials with exact rational coefficients. Terms live in a
//! BTreeMap so every traversal is deterministic; zero coefficients are never
//! stored. Each polynomial carries a declared variable order which drives
//! display and the default grevlex comparisons, but equality is equality of
//! the normalized term maps, so declaring extra unused variables does not
//! create a different polynomial.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::error::{KernelError, Result};
use crate::monomial::{Monomial, MonomialOrder};
use crate::rational::{rational_to_string, Rational};

#[derive(Clone, Debug)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Polynomial {}

/// Declared orders merge left-to-right: the left operand's order is kept and
/// unseen variables from the right are appended in their own order.
pub fn union_vars(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = a.to_vec();
    let seen: BTreeSet<&String> = a.iter().collect();
    for v in b {
        if !seen.contains(v) && !out[a.len()..].contains(v) {
            out.push(v.clone());
        }
    }
    out
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { vars: Vec::new(), terms: BTreeMap::new() }
    }

    pub fn zero_in(vars: &[String]) -> Self {
        Polynomial { vars: vars.to_vec(), terms: BTreeMap::new() }
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Polynomial { vars: Vec::new(), terms }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(name), Rational::from_integer(1.into()));
        Polynomial { vars: vec![name.to_string()], terms }
    }

    pub fn term(coeff: Rational, m: Monomial) -> Self {
        let vars: Vec<String> = m.vars().map(str::to_string).collect();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        Polynomial { vars, terms }
    }

    /// Builds from raw terms, summing duplicates and dropping zeros. The
    /// declared order is extended with any term variable it does not cover.
    pub fn from_terms(
        vars: &[String],
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        let mut declared = vars.to_vec();
        let mut seen: BTreeSet<String> = declared.iter().cloned().collect();
        for (m, c) in terms {
            for v in m.vars() {
                if seen.insert(v.to_string()) {
                    declared.push(v.to_string());
                }
            }
            let entry = map.entry(m).or_insert_with(Rational::zero);
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        Polynomial { vars: declared, terms: map }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Variables that actually occur in some term.
    pub fn occurring_vars(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.vars().map(str::to_string))
            .collect()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_part(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Highest total degree counting only the given variables, 0 for the
    /// zero polynomial.
    pub fn degree_in(&self, vars: &BTreeSet<String>) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(vars.iter().map(String::as_str)))
            .max()
            .unwrap_or(0)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Rational) -> Rational) -> Polynomial {
        Polynomial::from_terms(
            &self.vars,
            self.terms.iter().map(|(m, c)| (m.clone(), f(c))),
        )
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero_in(&self.vars);
        }
        self.map_coeffs(|x| x * c)
    }

    pub fn mul_term(&self, coeff: &Rational, m: &Monomial) -> Polynomial {
        Polynomial::from_terms(
            &self.vars,
            self.terms
                .iter()
                .map(|(tm, tc)| (tm.mul(m), tc * coeff)),
        )
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(Rational::from_integer(1.into()));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Polynomial {
        let vars: Vec<String> = self
            .vars
            .iter()
            .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
            .collect();
        Polynomial::from_terms(
            &vars,
            self.terms.iter().map(|(m, c)| (m.rename(map), c.clone())),
        )
    }

    /// Substitutes an image polynomial for every occurring variable. Acts as
    /// a ring homomorphism; variables without an image are an error.
    pub fn substitute(&self, images: &BTreeMap<String, Polynomial>) -> Result<Polynomial> {
        for v in self.occurring_vars() {
            if !images.contains_key(&v) {
                return Err(KernelError::MissingVariable { var: v });
            }
        }
        // cache powers per variable so repeated exponents are not recomputed
        let mut powers: BTreeMap<(String, u32), Polynomial> = BTreeMap::new();
        let mut acc = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut factor = Polynomial::constant(c.clone());
            for (v, k) in m.iter() {
                let key = (v.to_string(), k);
                if !powers.contains_key(&key) {
                    let p = images[v].pow(k);
                    powers.insert(key.clone(), p);
                }
                factor = &factor * &powers[&key];
            }
            acc = &acc + &factor;
        }
        Ok(acc)
    }

    pub fn derivative(&self, var: &str) -> Polynomial {
        Polynomial::from_terms(
            &self.vars,
            self.terms.iter().filter_map(|(m, c)| {
                let k = m.exp(var);
                if k == 0 {
                    return None;
                }
                let lowered = Monomial::from_exps(
                    m.iter()
                        .map(|(v, e)| (v.to_string(), if v == var { e - 1 } else { e })),
                );
                Some((lowered, c * Rational::from_integer(k.into())))
            }),
        )
    }

    /// Iterated partial derivative with multiplicities `sigma` over `vars`.
    pub fn derivative_multi(&self, vars: &[String], sigma: &[u32]) -> Polynomial {
        let mut acc = self.clone();
        for (v, &k) in vars.iter().zip(sigma) {
            for _ in 0..k {
                acc = acc.derivative(v);
            }
        }
        acc
    }

    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Result<Rational> {
        for v in self.occurring_vars() {
            if !point.contains_key(&v) {
                return Err(KernelError::MissingVariable { var: v });
            }
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, k) in m.iter() {
                for _ in 0..k {
                    t *= &point[v];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn leading(&self, order: &MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| order.cmp(a, b))
            .map(|(m, c)| (m, c))
    }

    /// Terms sorted descending under `order`, leading term first.
    pub fn sorted_terms(&self, order: &MonomialOrder) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| order.cmp(b, a));
        v
    }

    /// Renders in the text grammar, terms in descending grevlex over the
    /// declared variables.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let order = MonomialOrder::grevlex(&self.vars);
        let mut out = String::new();
        for (i, (m, c)) in self.sorted_terms(&order).into_iter().enumerate() {
            let neg = c < &Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let coeff_is_one = abs == Rational::from_integer(1.into());
            if m.is_one() {
                out.push_str(&rational_to_string(&abs));
            } else if coeff_is_one {
                out.push_str(&m.to_string());
            } else {
                out.push_str(&format!("{}*{}", rational_to_string(&abs), m));
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::from_terms(
            &union_vars(&self.vars, &rhs.vars),
            self.terms
                .iter()
                .chain(rhs.terms.iter())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::from_terms(
            &union_vars(&self.vars, &rhs.vars),
            self.terms
                .iter()
                .map(|(m, c)| (m.clone(), c.clone()))
                .chain(rhs.terms.iter().map(|(m, c)| (m.clone(), -c.clone()))),
        )
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut terms: Vec<(Monomial, Rational)> =
            Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                terms.push((ma.mul(mb), ca * cb));
            }
        }
        Polynomial::from_terms(&union_vars(&self.vars, &rhs.vars), terms)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.map_coeffs(|c| -c.clone())
    }
}
