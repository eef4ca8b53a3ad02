//! Exact Hadamard decomposition of a polynomial f(x, y) along the y-block:
//! the Taylor part up to a chosen order l plus remainder coefficients
//! attached to the degree-(l+1) monomials in y. On polynomials the splitting
//! is a finite rearrangement of terms, so the reconstruction identity holds
//! on the nose. Remainder terms are routed to the lexicographically smallest
//! divisor of their y-part, which makes the output canonical.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{KernelError, Result};
use crate::monomial::{monomial_from_index, Monomial};
use crate::poly::Polynomial;
use crate::rational::multi_factorial;

#[derive(Clone, Debug, PartialEq)]
pub struct HadamardExpansion {
    x_vars: Vec<String>,
    y_vars: Vec<String>,
    order: u32,
    taylor: BTreeMap<Vec<u32>, Polynomial>,
    remainders: BTreeMap<Vec<u32>, Polynomial>,
}

impl HadamardExpansion {
    pub fn x_vars(&self) -> &[String] {
        &self.x_vars
    }

    pub fn y_vars(&self) -> &[String] {
        &self.y_vars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Nonzero Taylor coefficients, keyed by the y-multi-index. Entries
    /// satisfy taylor[sigma] = (1/sigma!) d^sigma f at y = 0.
    pub fn taylor(&self) -> &BTreeMap<Vec<u32>, Polynomial> {
        &self.taylor
    }

    pub fn taylor_term(&self, sigma: &[u32]) -> Polynomial {
        self.taylor.get(sigma).cloned().unwrap_or_else(Polynomial::zero)
    }

    /// Remainder coefficients, keyed by multi-indices of degree order + 1.
    pub fn remainders(&self) -> &BTreeMap<Vec<u32>, Polynomial> {
        &self.remainders
    }

    /// Reassembles sum(y^sigma taylor) + sum(y^tau remainders); equals the
    /// expanded polynomial exactly.
    pub fn reconstruct(&self) -> Polynomial {
        let mut acc = Polynomial::zero();
        for (sigma, coeff) in &self.taylor {
            let m = monomial_from_index(&self.y_vars, sigma);
            acc = &acc + &coeff.mul_term(&crate::rational::rat(1), &m);
        }
        for (tau, coeff) in &self.remainders {
            let m = monomial_from_index(&self.y_vars, tau);
            acc = &acc + &coeff.mul_term(&crate::rational::rat(1), &m);
        }
        acc
    }
}

fn smallest_divisor(rho: &[u32], budget: u32) -> Vec<u32> {
    let mut tau = vec![0u32; rho.len()];
    let mut remaining = budget;
    for i in 0..rho.len() {
        let later: u32 = rho[i + 1..].iter().sum();
        let take = remaining.saturating_sub(later).min(rho[i]);
        tau[i] = take;
        remaining -= take;
    }
    debug_assert_eq!(remaining, 0);
    tau
}

/// Splits f into Taylor terms of y-degree <= l and remainder coefficients
/// for the y-degree >= l+1 part. The x and y blocks must be disjoint and
/// cover every variable occurring in f.
pub fn hadamard_expand(
    f: &Polynomial,
    x_vars: &[String],
    y_vars: &[String],
    l: u32,
) -> Result<HadamardExpansion> {
    let xs: BTreeSet<&str> = x_vars.iter().map(|s| s.as_str()).collect();
    let ys: BTreeSet<&str> = y_vars.iter().map(|s| s.as_str()).collect();
    if let Some(shared) = xs.intersection(&ys).next() {
        return Err(KernelError::invalid(format!("variable {shared} is in both blocks")));
    }
    if x_vars.len() != xs.len() || y_vars.len() != ys.len() {
        return Err(KernelError::invalid("repeated variable in a block"));
    }
    for v in f.occurring_vars() {
        if !xs.contains(v.as_str()) && !ys.contains(v.as_str()) {
            return Err(KernelError::invalid(format!("variable {v} is in neither block")));
        }
    }

    let mut taylor: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::new();
    let mut remainders: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::new();
    for (m, c) in f.terms() {
        let rho: Vec<u32> = y_vars.iter().map(|v| m.exp(v)).collect();
        let ydeg: u32 = rho.iter().sum();
        let x_part = Monomial::from_exps(
            m.iter().filter(|(v, _)| !ys.contains(*v)).map(|(v, k)| (v.to_string(), k)),
        );
        if ydeg <= l {
            let entry = taylor.entry(rho).or_insert_with(Polynomial::zero);
            *entry = &*entry + &Polynomial::term(c.clone(), x_part);
        } else {
            let tau = smallest_divisor(&rho, l + 1);
            let left: Vec<u32> = rho.iter().zip(&tau).map(|(r, t)| r - t).collect();
            let rest = monomial_from_index(y_vars, &left).mul(&x_part);
            let entry = remainders.entry(tau).or_insert_with(Polynomial::zero);
            *entry = &*entry + &Polynomial::term(c.clone(), rest);
        }
    }
    taylor.retain(|_, p| !p.is_zero());
    remainders.retain(|_, p| !p.is_zero());
    Ok(HadamardExpansion {
        x_vars: x_vars.to_vec(),
        y_vars: y_vars.to_vec(),
        order: l,
        taylor,
        remainders,
    })
}

/// The remainder coefficients of f when its whole jet up to order l in the
/// y-block vanishes; errors on the first surviving Taylor term.
pub fn vanishing_quotient(
    f: &Polynomial,
    y_vars: &[String],
    l: u32,
) -> Result<BTreeMap<Vec<u32>, Polynomial>> {
    let ys: BTreeSet<String> = y_vars.iter().cloned().collect();
    let x_vars: Vec<String> =
        f.occurring_vars().into_iter().filter(|v| !ys.contains(v)).collect();
    let expansion = hadamard_expand(f, &x_vars, y_vars, l)?;
    if let Some((sigma, coeff)) = expansion.taylor.iter().next() {
        return Err(KernelError::NonvanishingJet {
            sigma: sigma.clone(),
            coefficient: coeff.to_string(),
        });
    }
    Ok(expansion.remainders)
}

/// Taylor coefficient cross-check value: d^sigma f / dy^sigma at y = 0,
/// divided by sigma factorial.
pub fn taylor_by_derivatives(
    f: &Polynomial,
    y_vars: &[String],
    sigma: &[u32],
) -> Result<Polynomial> {
    let deriv = f.derivative_multi(y_vars, sigma);
    let mut at_zero = BTreeMap::new();
    for v in deriv.occurring_vars() {
        if y_vars.contains(&v) {
            at_zero.insert(v.clone(), Polynomial::zero());
        } else {
            at_zero.insert(v.clone(), Polynomial::var(&v));
        }
    }
    let fact = multi_factorial(sigma);
    Ok(deriv.substitute(&at_zero)?.scale(&(crate::rational::rat(1) / fact)))
}
