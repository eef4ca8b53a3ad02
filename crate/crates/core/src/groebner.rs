//! Multivariate division and Buchberger's algorithm with cofactor tracking.
//!
//! Division is the classical algorithm: reduce the leading reducible term,
//! move irreducible leading terms to the remainder, repeat. It returns the
//! full quotient list, so `p = sum(q_i * b_i) + r` holds exactly and is
//! checked by the property tests. Extra variables that do not belong to the
//! basis block are handled by a block order in which basis variables
//! dominate, which makes them behave as coefficients.
//!
//! Buchberger keeps, next to every basis element, its expression as a
//! combination of the original generators. Minimalization, autoreduction and
//! the final monic scaling all update these rows, so the reduced basis comes
//! with an exact cofactor matrix over the generators as supplied by the
//! caller. That is what lets ideal membership answers be handed back as
//! decompositions over the caller's own generator list rather than over the
//! internal basis.

use num_traits::One;

use crate::error::{KernelError, Result};
use crate::monomial::{Monomial, MonomialOrder};
use crate::poly::{union_vars, Polynomial};
use crate::rational::Rational;

/// Default bound on the number of S-pairs Buchberger may enqueue.
pub const DEFAULT_PAIR_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DivisionResult {
    pub quotients: Vec<Polynomial>,
    pub remainder: Polynomial,
}

impl DivisionResult {
    /// sum(quotients_i * divisors_i) + remainder, for checking exactness.
    pub fn recombine(&self, divisors: &[Polynomial]) -> Polynomial {
        let mut acc = self.remainder.clone();
        for (q, d) in self.quotients.iter().zip(divisors) {
            acc = &acc + &(q * d);
        }
        acc
    }
}

/// Divides `p` by the ordered list of divisors under `order`. Total: always
/// returns, with every remainder term divisible by no divisor leading term.
pub fn divide(p: &Polynomial, divisors: &[Polynomial], order: &MonomialOrder) -> DivisionResult {
    let leads: Vec<Option<(Monomial, Rational)>> = divisors
        .iter()
        .map(|d| d.leading(order).map(|(m, c)| (m.clone(), c.clone())))
        .collect();
    let mut quotients = vec![Polynomial::zero(); divisors.len()];
    let mut remainder = Polynomial::zero_in(p.vars());
    let mut work = p.clone();
    'outer: while !work.is_zero() {
        let (lm, lc) = {
            let (m, c) = work.leading(order).expect("nonzero polynomial has a leading term");
            (m.clone(), c.clone())
        };
        for (i, lead) in leads.iter().enumerate() {
            if let Some((dm, dc)) = lead {
                if let Some(qm) = dm.quotient_of(&lm) {
                    let qc = &lc / dc;
                    quotients[i] = &quotients[i] + &Polynomial::term(qc.clone(), qm.clone());
                    work = &work - &divisors[i].mul_term(&qc, &qm);
                    continue 'outer;
                }
            }
        }
        remainder = &remainder + &Polynomial::term(lc.clone(), lm.clone());
        work = &work - &Polynomial::term(lc, lm);
    }
    DivisionResult { quotients, remainder }
}

/// A reduced Groebner basis with an exact cofactor matrix over the original
/// generators.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    vars: Vec<String>,
    generators: Vec<Polynomial>,
    basis: Vec<Polynomial>,
    cofactors: Vec<Vec<Polynomial>>,
}

struct Tracked {
    poly: Polynomial,
    row: Vec<Polynomial>,
}

fn row_sub_scaled(row: &mut [Polynomial], other: &[Polynomial], q: &Polynomial) {
    for (r, o) in row.iter_mut().zip(other) {
        *r = &*r - &(q * o);
    }
}

impl GroebnerBasis {
    /// Runs Buchberger over the given basis variables. Variables of the
    /// generators must all belong to `vars`; the generator list is kept
    /// verbatim, including zero or redundant entries.
    pub fn new(generators: Vec<Polynomial>, vars: Vec<String>, pair_cap: usize) -> Result<Self> {
        for g in &generators {
            for v in g.occurring_vars() {
                if !vars.contains(&v) {
                    return Err(KernelError::invalid(format!(
                        "generator {g} uses {v}, which is not a basis variable"
                    )));
                }
            }
        }
        let order = MonomialOrder::grevlex(&vars);
        let unit = |i: usize| -> Vec<Polynomial> {
            (0..generators.len())
                .map(|j| {
                    if i == j {
                        Polynomial::constant(Rational::one())
                    } else {
                        Polynomial::zero()
                    }
                })
                .collect()
        };
        let mut work: Vec<Tracked> = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            if !g.is_zero() {
                work.push(Tracked { poly: g.clone(), row: unit(i) });
            }
        }
        let mut leads: Vec<Monomial> = work
            .iter()
            .map(|t| t.poly.leading(&order).expect("tracked polys are nonzero").0.clone())
            .collect();

        // normal selection: pairs sorted descending by cached lcm, so popping
        // from the end yields the smallest lcm first
        let mut pairs: Vec<(usize, usize, Monomial)> = Vec::new();
        for i in 0..work.len() {
            for j in (i + 1)..work.len() {
                pairs.push((i, j, leads[i].lcm(&leads[j])));
            }
        }
        let sort_pairs = |pairs: &mut Vec<(usize, usize, Monomial)>| {
            pairs.sort_by(|a, b| {
                order.cmp(&b.2, &a.2).then_with(|| (b.0, b.1).cmp(&(a.0, a.1)))
            });
        };
        sort_pairs(&mut pairs);
        let mut enqueued = pairs.len();
        if enqueued > pair_cap {
            return Err(KernelError::PairCapExceeded { cap: pair_cap });
        }

        while let Some((i, j, lcm)) = pairs.pop() {
            // coprime leading monomials: the S-polynomial reduces to zero
            if lcm == leads[i].mul(&leads[j]) {
                continue;
            }
            let ci = work[i].poly.leading(&order).expect("nonzero").1.clone();
            let cj = work[j].poly.leading(&order).expect("nonzero").1.clone();
            let mi = leads[i].quotient_of(&lcm).expect("lcm divisible by both leads");
            let mj = leads[j].quotient_of(&lcm).expect("lcm divisible by both leads");
            let ai = ci.recip();
            let aj = cj.recip();
            let s = &work[i].poly.mul_term(&ai, &mi) - &work[j].poly.mul_term(&aj, &mj);
            if s.is_zero() {
                continue;
            }
            let mut srow: Vec<Polynomial> = work[i]
                .row
                .iter()
                .zip(&work[j].row)
                .map(|(ri, rj)| &ri.mul_term(&ai, &mi) - &rj.mul_term(&aj, &mj))
                .collect();

            let current: Vec<Polynomial> = work.iter().map(|t| t.poly.clone()).collect();
            let div = divide(&s, &current, &order);
            if div.remainder.is_zero() {
                continue;
            }
            for (k, q) in div.quotients.iter().enumerate() {
                if !q.is_zero() {
                    let other = work[k].row.clone();
                    row_sub_scaled(&mut srow, &other, q);
                }
            }
            let new_index = work.len();
            let new_lead =
                div.remainder.leading(&order).expect("nonzero remainder").0.clone();
            work.push(Tracked { poly: div.remainder, row: srow });
            for k in 0..new_index {
                pairs.push((k, new_index, leads[k].lcm(&new_lead)));
            }
            leads.push(new_lead);
            sort_pairs(&mut pairs);
            enqueued += new_index;
            if enqueued > pair_cap {
                return Err(KernelError::PairCapExceeded { cap: pair_cap });
            }
        }

        // minimalize: drop elements whose leading monomial is divisible by
        // another kept element's leading monomial
        let leads: Vec<Monomial> = work
            .iter()
            .map(|t| t.poly.leading(&order).expect("nonzero").0.clone())
            .collect();
        let mut keep = vec![true; work.len()];
        for i in 0..work.len() {
            if !keep[i] {
                continue;
            }
            for j in 0..work.len() {
                if i == j || !keep[j] {
                    continue;
                }
                if leads[j].divides(&leads[i]) && (leads[j] != leads[i] || j < i) {
                    keep[i] = false;
                    break;
                }
            }
        }
        let mut reduced: Vec<Tracked> = work
            .into_iter()
            .zip(keep)
            .filter_map(|(t, k)| k.then_some(t))
            .collect();

        // autoreduce: one pass suffices because leading terms never change
        for i in 0..reduced.len() {
            let others: Vec<Polynomial> = reduced
                .iter()
                .enumerate()
                .map(|(j, t)| if j == i { Polynomial::zero() } else { t.poly.clone() })
                .collect();
            let div = divide(&reduced[i].poly, &others, &order);
            reduced[i].poly = div.remainder;
            for (j, q) in div.quotients.iter().enumerate() {
                if !q.is_zero() {
                    let other = reduced[j].row.clone();
                    row_sub_scaled(&mut reduced[i].row, &other, q);
                }
            }
        }

        // monic scaling
        for t in &mut reduced {
            let (_, lc) = t.poly.leading(&order).expect("nonzero");
            let inv = lc.recip();
            t.poly = t.poly.scale(&inv);
            for r in &mut t.row {
                *r = r.scale(&inv);
            }
        }

        reduced.sort_by(|a, b| {
            let (la, _) = a.poly.leading(&order).expect("nonzero");
            let (lb, _) = b.poly.leading(&order).expect("nonzero");
            order.cmp(la, lb)
        });

        let gb = GroebnerBasis {
            vars,
            basis: reduced.iter().map(|t| t.poly.clone()).collect(),
            cofactors: reduced.into_iter().map(|t| t.row).collect(),
            generators,
        };
        debug_assert!(gb.cofactors_exact());
        Ok(gb)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    pub fn cofactors(&self) -> &[Vec<Polynomial>] {
        &self.cofactors
    }

    pub fn order(&self) -> MonomialOrder {
        MonomialOrder::grevlex(&self.vars)
    }

    /// The block order used to reduce a polynomial that may carry parameter
    /// variables outside the basis block.
    pub fn order_for(&self, p: &Polynomial) -> MonomialOrder {
        let params: Vec<String> = p
            .vars()
            .iter()
            .filter(|v| !self.vars.contains(v))
            .cloned()
            .collect();
        MonomialOrder::block(&self.vars, &params)
    }

    /// Whether every basis element recombines exactly from the generators
    /// through the cofactor matrix.
    pub fn cofactors_exact(&self) -> bool {
        self.basis.iter().zip(&self.cofactors).all(|(b, row)| {
            let mut acc = Polynomial::zero();
            for (c, g) in row.iter().zip(&self.generators) {
                acc = &acc + &(c * g);
            }
            acc == *b
        })
    }

    /// Divides by the reduced basis under the block order, parameters as
    /// coefficients. The remainder is the canonical normal form.
    pub fn reduce(&self, p: &Polynomial) -> DivisionResult {
        divide(p, &self.basis, &self.order_for(p))
    }

    /// Like [`GroebnerBasis::reduce`] but with the quotients recombined
    /// through the cofactor matrix, so the decomposition is over the original
    /// generators: `p = sum(mu_i * generators_i) + remainder`.
    pub fn reduce_over_generators(&self, p: &Polynomial) -> (Vec<Polynomial>, Polynomial) {
        let div = self.reduce(p);
        let mut mu = vec![Polynomial::zero(); self.generators.len()];
        for (q, row) in div.quotients.iter().zip(&self.cofactors) {
            if q.is_zero() {
                continue;
            }
            for (m, c) in mu.iter_mut().zip(row) {
                *m = &*m + &(q * c);
            }
        }
        (mu, div.remainder)
    }
}

/// Public entry point matching the division operation: block order with the
/// basis variables dominant, extra variables of `p` as parameters.
pub fn divide_with_params(
    p: &Polynomial,
    divisors: &[Polynomial],
    basis_vars: &[String],
) -> DivisionResult {
    let all: Vec<String> = divisors
        .iter()
        .fold(p.vars().to_vec(), |acc, d| union_vars(&acc, d.vars()));
    let params: Vec<String> = all.into_iter().filter(|v| !basis_vars.contains(v)).collect();
    divide(p, divisors, &MonomialOrder::block(basis_vars, &params))
}
