//! Factorizations of plots through Cartesian spaces and the machinery that
//! decides their zig-zag equivalence. A factorization pair is (iota, f) with
//! iota: U x D -> V into a Cartesian space and f: V -> R^K. Two pairs with
//! equal composites are linked by an explicit chain of generating-relation
//! steps through a constructed witness span (W, alpha, alpha', phi); every
//! constructor here verifies its output before returning it.

use std::collections::BTreeMap;

use crate::error::{KernelError, Result};
use crate::formal::{
    compose, is_mono_point, is_rectified, rectify_affine, shear_rectify, FormalMorphism,
    FormalSpace,
};
use crate::hadamard::vanishing_quotient;
use crate::poly::Polynomial;

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationPair {
    iota: FormalMorphism,
    f: FormalMorphism,
}

impl FactorizationPair {
    pub fn new(iota: FormalMorphism, f: FormalMorphism) -> Result<Self> {
        if !iota.target().is_cartesian() {
            return Err(KernelError::shape("the middle space must be Cartesian"));
        }
        if !f.target().is_cartesian() {
            return Err(KernelError::shape("the plot target must be Cartesian"));
        }
        if f.source() != iota.target() {
            return Err(KernelError::TypeMismatch {
                expected: format!("f out of {}", iota.target()),
                found: format!("f out of {}", f.source()),
            });
        }
        Ok(FactorizationPair { iota, f })
    }

    pub fn iota(&self) -> &FormalMorphism {
        &self.iota
    }

    pub fn f(&self) -> &FormalMorphism {
        &self.f
    }

    pub fn source(&self) -> &FormalSpace {
        self.iota.source()
    }

    pub fn middle(&self) -> &FormalSpace {
        self.iota.target()
    }

    pub fn plot_len(&self) -> usize {
        self.f.components().len()
    }

    /// The plot the pair factors, as a morphism into the standard R^K.
    pub fn composite(&self) -> FormalMorphism {
        let c = compose(&self.f, &self.iota).expect("pairs are composable");
        FormalMorphism::new(
            self.source().clone(),
            FormalSpace::standard_r(c.components().len()),
            c.component_polys(),
        )
        .expect("retargeting a plot to the standard coordinates")
    }
}

/// Componentwise normal-form equality of the two composites. The pairs must
/// share their source and plot length.
pub fn equal_composites(p: &FactorizationPair, q: &FactorizationPair) -> Result<bool> {
    Ok(first_differing_component(p, q)?.is_none())
}

fn first_differing_component(
    p: &FactorizationPair,
    q: &FactorizationPair,
) -> Result<Option<usize>> {
    if p.source() != q.source() {
        return Err(KernelError::shape("pairs have different sources"));
    }
    if p.plot_len() != q.plot_len() {
        return Err(KernelError::shape("pairs have different plot lengths"));
    }
    let a = p.composite();
    let b = q.composite();
    for (i, (x, y)) in a.components().iter().zip(b.components()).enumerate() {
        if x != y {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One generating-relation step between two factorization pairs. Forward
/// means the connecting map runs from.middle -> to.middle; backward means it
/// runs the other way. In either case both triangles must commute exactly:
/// the connecting map carries one iota to the other and intertwines the fs.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationStep {
    pub from: FactorizationPair,
    pub to: FactorizationPair,
    pub connecting: FormalMorphism,
    pub direction: Direction,
}

impl RelationStep {
    pub fn verify(&self) -> Result<()> {
        let (lo, hi) = match self.direction {
            Direction::Forward => (&self.from, &self.to),
            Direction::Backward => (&self.to, &self.from),
        };
        let carried = compose(&self.connecting, &lo.iota)?;
        if carried != hi.iota {
            return Err(KernelError::WitnessViolation {
                identity: "connecting_iota_eq_iota".into(),
            });
        }
        let pulled = compose(&hi.f, &self.connecting)?;
        if pulled.components() != lo.f.components() {
            return Err(KernelError::WitnessViolation {
                identity: "f_eq_f_connecting".into(),
            });
        }
        Ok(())
    }
}

/// The constructed common refinement of two equal-composite factorizations:
/// a Cartesian span space W with alpha: V -> W, alpha': V' -> W, a single
/// function phi: W -> R^K restricting to both fs, and the certificate
/// delta_k = sum_i h_i mu^i_k that makes the construction work.
#[derive(Clone, Debug)]
pub struct WitnessSpan {
    pub w: FormalSpace,
    pub alpha: FormalMorphism,
    pub alpha_prime: FormalMorphism,
    pub phi: FormalMorphism,
    pub delta: Vec<Polynomial>,
    pub mu: Vec<Vec<Polynomial>>,
    pub h: Vec<Polynomial>,
}

impl WitnessSpan {
    /// Checks the span against the data it was built for: phi restricts to
    /// both fs along the alphas, the alphas agree on the common source, and
    /// delta decomposes over h. Every identity is exact.
    pub fn verify(
        &self,
        iota: &FormalMorphism,
        f: &FormalMorphism,
        iota_prime: &FormalMorphism,
        f_prime: &FormalMorphism,
    ) -> Result<()> {
        let through = compose(&self.phi, &self.alpha)?;
        if through.components() != f.components() {
            return Err(KernelError::WitnessViolation { identity: "phi_alpha_eq_f".into() });
        }
        let through = compose(&self.phi, &self.alpha_prime)?;
        if through.components() != f_prime.components() {
            return Err(KernelError::WitnessViolation {
                identity: "phi_alpha_prime_eq_f_prime".into(),
            });
        }
        if compose(&self.alpha, iota)? != compose(&self.alpha_prime, iota_prime)? {
            return Err(KernelError::WitnessViolation {
                identity: "alpha_iota_eq_alpha_prime_iota_prime".into(),
            });
        }
        for (k, d) in self.delta.iter().enumerate() {
            let mut acc = Polynomial::zero();
            for (hi, mi) in self.h.iter().zip(&self.mu[k]) {
                acc = &acc + &(hi * mi);
            }
            if &acc != d {
                return Err(KernelError::WitnessViolation {
                    identity: "delta_eq_sum_h_mu".into(),
                });
            }
        }
        Ok(())
    }
}

fn require_rectified(m: &FormalMorphism, which: &str) -> Result<()> {
    if !is_rectified(m) {
        return Err(KernelError::NotRectified {
            detail: format!("{which} is not in standard position (u, eps, 0)"),
        });
    }
    Ok(())
}

fn require_pair_shapes(
    iota: &FormalMorphism,
    f: &FormalMorphism,
    iota_prime: &FormalMorphism,
    f_prime: &FormalMorphism,
) -> Result<()> {
    if iota.source() != iota_prime.source() {
        return Err(KernelError::shape("the two factorizations have different sources"));
    }
    if f.source() != iota.target() || f_prime.source() != iota_prime.target() {
        return Err(KernelError::shape("f must be a map out of iota's target"));
    }
    if f.components().len() != f_prime.components().len() {
        return Err(KernelError::shape("plot lengths differ"));
    }
    Ok(())
}

/// delta_k in the source coordinate names: f_k pulled back along the
/// standard inclusion, as a raw polynomial (no normal form).
fn pull_to_zero_section(f_k: &Polynomial, middle: &FormalSpace, src: &[String]) -> Polynomial {
    let coords = middle.coords();
    let mut map = BTreeMap::new();
    for (j, c) in coords.iter().enumerate() {
        if j < src.len() {
            map.insert(c.clone(), Polynomial::var(&src[j]));
        } else {
            map.insert(c.clone(), Polynomial::zero());
        }
    }
    f_k.substitute(&map).expect("total substitution")
}

fn build_span(
    iota: &FormalMorphism,
    f: &FormalMorphism,
    iota_prime: &FormalMorphism,
    f_prime: &FormalMorphism,
    h: Vec<Polynomial>,
    delta: Vec<Polynomial>,
    mu: Vec<Vec<Polynomial>>,
) -> Result<WitnessSpan> {
    let source = iota.source();
    let src = source.coords();
    let prefix = src.len();
    let v = iota.target();
    let v_prime = iota_prime.target();
    let a_coords = v.coords();
    let b_coords = v_prime.coords();

    let (vv, prime_renames) = v.product(v_prime);
    let b_in_w: Vec<String> = b_coords
        .iter()
        .map(|c| prime_renames.get(c).cloned().unwrap_or_else(|| c.clone()))
        .collect();
    let slack_raw: Vec<String> = (1..=h.len()).map(|i| format!("j{i}")).collect();
    let slack_cart = FormalSpace::cartesian("S", slack_raw.clone())?;
    let (w, slack_renames) = vv.product(&slack_cart);
    let w = w.with_name("W");
    let slack: Vec<String> = slack_raw
        .iter()
        .map(|c| slack_renames.get(c).cloned().unwrap_or_else(|| c.clone()))
        .collect();

    let mut alpha_components: Vec<Polynomial> =
        a_coords.iter().map(|c| Polynomial::var(c)).collect();
    for j in 0..b_coords.len() {
        alpha_components.push(if j < prefix {
            Polynomial::var(&a_coords[j])
        } else {
            Polynomial::zero()
        });
    }
    alpha_components.extend(std::iter::repeat(Polynomial::zero()).take(h.len()));
    let alpha = FormalMorphism::new(v.clone(), w.clone(), alpha_components)?;

    let eps_to_b: BTreeMap<String, String> = source
        .eps()
        .iter()
        .enumerate()
        .map(|(j, e)| (e.clone(), b_coords[source.params().len() + j].clone()))
        .collect();
    let mut alpha_prime_components: Vec<Polynomial> = (0..a_coords.len())
        .map(|j| if j < prefix { Polynomial::var(&b_coords[j]) } else { Polynomial::zero() })
        .collect();
    alpha_prime_components.extend(b_coords.iter().map(|c| Polynomial::var(c)));
    alpha_prime_components.extend(h.iter().map(|hi| hi.rename_vars(&eps_to_b)));
    let alpha_prime = FormalMorphism::new(v_prime.clone(), w.clone(), alpha_prime_components)?;

    // f' with its first q+d slots redirected to the first factor of W
    let mut b_to_first: BTreeMap<String, Polynomial> = BTreeMap::new();
    let mut b_to_w: BTreeMap<String, Polynomial> = BTreeMap::new();
    for (j, c) in b_coords.iter().enumerate() {
        if j < prefix {
            b_to_first.insert(c.clone(), Polynomial::zero());
            b_to_w.insert(c.clone(), Polynomial::var(&a_coords[j]));
        } else {
            b_to_first.insert(c.clone(), Polynomial::zero());
            b_to_w.insert(c.clone(), Polynomial::var(&b_in_w[j]));
        }
    }
    for (j, c) in b_coords.iter().enumerate().take(prefix) {
        b_to_first.insert(c.clone(), Polynomial::var(&a_coords[j]));
    }
    let src_to_a: BTreeMap<String, String> =
        src.iter().cloned().zip(a_coords.iter().cloned()).collect();

    let mut phi_components = Vec::with_capacity(f.components().len());
    for (k, fk) in f.components().iter().enumerate() {
        let fk = fk.value();
        let f_prime_k = f_prime.components()[k].value();
        let at_zero = f_prime_k.substitute(&b_to_first)?;
        let shifted = f_prime_k.substitute(&b_to_w)?;
        let mut slack_part = Polynomial::zero();
        for (i, s) in slack.iter().enumerate() {
            let mu_ik = mu[k][i].rename_vars(&src_to_a);
            slack_part = &slack_part + &(&Polynomial::var(s) * &mu_ik);
        }
        phi_components.push(&(&(fk - &at_zero) + &shifted) + &slack_part);
    }
    let phi = FormalMorphism::new(
        w.clone(),
        FormalSpace::standard_r(f.components().len()),
        phi_components,
    )?;

    // the defining property of delta, checked while the rectified forms are
    // at hand
    for (k, d) in delta.iter().enumerate() {
        let expected = &pull_to_zero_section(f_prime.components()[k].value(), v_prime, &src)
            - &pull_to_zero_section(f.components()[k].value(), v, &src);
        if d != &expected {
            return Err(KernelError::WitnessViolation { identity: "delta_definition".into() });
        }
    }

    let span = WitnessSpan { w, alpha, alpha_prime, phi, delta, mu, h };
    span.verify(iota, f, iota_prime, f_prime)?;
    Ok(span)
}

/// The parameterized witness construction. Both iotas must be in standard
/// position out of the same U x D; the composites must be equal, which
/// surfaces as the not-in-ideal error when violated. mu comes from the
/// cofactor-tracked decomposition over the presentation generators, so the
/// span is exact even when delta depends on the parameters.
pub fn witness_general(
    iota: &FormalMorphism,
    f: &FormalMorphism,
    iota_prime: &FormalMorphism,
    f_prime: &FormalMorphism,
) -> Result<WitnessSpan> {
    require_pair_shapes(iota, f, iota_prime, f_prime)?;
    require_rectified(iota, "iota")?;
    require_rectified(iota_prime, "iota'")?;
    let source = iota.source();
    let src = source.coords();
    let algebra = source.thickening();
    let h = algebra.generators().to_vec();
    let mut delta = Vec::new();
    let mut mu = Vec::new();
    for (k, fk) in f.components().iter().enumerate() {
        let d = &pull_to_zero_section(f_prime.components()[k].value(), iota_prime.target(), &src)
            - &pull_to_zero_section(fk.value(), iota.target(), &src);
        mu.push(algebra.ideal_decompose(&d)?);
        delta.push(d);
    }
    build_span(iota, f, iota_prime, f_prime, h, delta, mu)
}

/// The witness construction over a bare thickened point: witness_general
/// with no parameter directions.
pub fn witness_point(
    iota: &FormalMorphism,
    f: &FormalMorphism,
    iota_prime: &FormalMorphism,
    f_prime: &FormalMorphism,
) -> Result<WitnessSpan> {
    if !iota.source().params().is_empty() {
        return Err(KernelError::shape("the source must be a bare thickened point"));
    }
    witness_general(iota, f, iota_prime, f_prime)
}

/// The first-order one-variable witness. The iotas must be affine-linear
/// monomorphisms out of D^1(1); they are rectified internally and the span
/// is transported back, so the returned identities hold against the
/// original inputs. mu is extracted with the order-1 Hadamard quotient and
/// h is the canonical (t^2).
pub fn witness_d1(
    iota: &FormalMorphism,
    f: &FormalMorphism,
    iota_prime: &FormalMorphism,
    f_prime: &FormalMorphism,
) -> Result<WitnessSpan> {
    require_pair_shapes(iota, f, iota_prime, f_prime)?;
    let source = iota.source();
    if !source.params().is_empty() || source.eps().len() != 1 || source.thickening().k() != 1 {
        return Err(KernelError::shape("the source must be a first-order one-variable disk"));
    }
    if !is_mono_point(iota)? {
        return Err(KernelError::NotMono { detail: format!("iota = {iota}") });
    }
    if !is_mono_point(iota_prime)? {
        return Err(KernelError::NotMono { detail: format!("iota' = {iota_prime}") });
    }
    let t = source.eps()[0].clone();
    // already-standard inputs keep their coordinates so the span is built
    // on V x V' itself
    let straighten =
        |m: &FormalMorphism| -> Result<(FormalMorphism, FormalMorphism, FormalMorphism)> {
            if is_rectified(m) {
                let id = FormalMorphism::identity(m.target());
                Ok((m.clone(), id.clone(), id))
            } else {
                let r = rectify_affine(m)?;
                Ok((r.rectified, r.diffeo, r.inverse))
            }
        };
    let (iota_r, diffeo, inverse) = straighten(iota)?;
    let (iota_pr, diffeo_prime, inverse_prime) = straighten(iota_prime)?;
    let f_r = compose(f, &inverse)?;
    let f_pr = compose(f_prime, &inverse_prime)?;

    let src = source.coords();
    let h = vec![Polynomial::var(&t).pow(2)];
    let mut delta = Vec::new();
    let mut mu = Vec::new();
    for (k, fk) in f_r.components().iter().enumerate() {
        let d = &pull_to_zero_section(f_pr.components()[k].value(), iota_pr.target(), &src)
            - &pull_to_zero_section(fk.value(), iota_r.target(), &src);
        let remainders = vanishing_quotient(&d, std::slice::from_ref(&t), 1)?;
        mu.push(vec![remainders.get(&vec![2]).cloned().unwrap_or_else(Polynomial::zero)]);
        delta.push(d);
    }
    let span = build_span(&iota_r, &f_r, &iota_pr, &f_pr, h, delta, mu)?;
    let alpha = compose(&span.alpha, &diffeo)?;
    let alpha_prime = compose(&span.alpha_prime, &diffeo_prime)?;
    let span = WitnessSpan { alpha, alpha_prime, ..span };
    span.verify(iota, f, iota_prime, f_prime)?;
    Ok(span)
}

/// Factors a plot through V = U x R^d by taking the normal-form polynomial
/// representative of each component; the composite reproduces the plot
/// exactly.
pub fn lift_plot(plot: &FormalMorphism) -> Result<FactorizationPair> {
    if !plot.target().is_cartesian() {
        return Err(KernelError::shape("plots land in Cartesian spaces"));
    }
    let source = plot.source();
    let middle = FormalSpace::cartesian(format!("{}_lift", source.name()), source.coords())?;
    let iota = FormalMorphism::new(
        source.clone(),
        middle.clone(),
        source.coords().iter().map(|c| Polynomial::var(c)).collect(),
    )?;
    let f = FormalMorphism::new(middle, plot.target().clone(), plot.component_polys())?;
    let pair = FactorizationPair::new(iota, f)?;
    debug_assert_eq!(pair.composite().components(), plot.components());
    Ok(pair)
}

/// Enlarges the middle space to V x U x R^d and replaces iota by the
/// concatenation (iota, u, eps), a formal proper embedding. The returned
/// step connects the new pair to the old one through the projection onto V.
pub fn embed_factorization(p: &FactorizationPair) -> Result<(FactorizationPair, RelationStep)> {
    let source = p.source().clone();
    let v = p.middle().clone();
    let u_cart = FormalSpace::cartesian("U", source.params().to_vec())?;
    let e_cart = FormalSpace::cartesian("E", source.eps().to_vec())?;
    let (vu, _) = v.product(&u_cart);
    let (v_hat, _) = vu.product(&e_cart);

    let mut iota_components = p.iota().component_polys();
    iota_components.extend(source.coords().iter().map(|c| Polynomial::var(c)));
    let iota_hat = FormalMorphism::new(source, v_hat.clone(), iota_components)?;
    let f_hat = FormalMorphism::new(v_hat.clone(), p.f().target().clone(), p.f().component_polys())?;
    let p_hat = FactorizationPair::new(iota_hat, f_hat)?;

    let projection = FormalMorphism::new(
        v_hat,
        v,
        p.middle().coords().iter().map(|c| Polynomial::var(c)).collect(),
    )?;
    let step = RelationStep {
        from: p_hat.clone(),
        to: p.clone(),
        connecting: projection,
        direction: Direction::Forward,
    };
    step.verify()?;
    Ok((p_hat, step))
}

/// A verified zig-zag linking two factorization pairs, or the first plot
/// component on which their composites differ.
#[derive(Clone, Debug)]
pub enum Decision {
    Equivalent(EquivalenceChain),
    NotEquivalent { component: usize },
}

#[derive(Clone, Debug)]
pub struct EquivalenceChain {
    pub left: FactorizationPair,
    pub right: FactorizationPair,
    pub steps: Vec<RelationStep>,
}

impl EquivalenceChain {
    /// Endpoints match, adjacent steps share their pairs, every step's
    /// triangles commute, and every pair along the chain has the common
    /// composite.
    pub fn verify(&self) -> Result<()> {
        if self.steps.is_empty() {
            if self.left != self.right {
                return Err(KernelError::WitnessViolation {
                    identity: "empty_chain_endpoints_equal".into(),
                });
            }
            return Ok(());
        }
        if self.steps[0].from != self.left {
            return Err(KernelError::WitnessViolation { identity: "chain_starts_at_left".into() });
        }
        if self.steps.last().expect("nonempty").to != self.right {
            return Err(KernelError::WitnessViolation { identity: "chain_ends_at_right".into() });
        }
        for window in self.steps.windows(2) {
            if window[0].to != window[1].from {
                return Err(KernelError::WitnessViolation {
                    identity: "chain_steps_adjacent".into(),
                });
            }
        }
        let composite = self.left.composite();
        for step in &self.steps {
            step.verify()?;
            if step.to.composite() != composite {
                return Err(KernelError::WitnessViolation {
                    identity: "chain_composites_equal".into(),
                });
            }
        }
        Ok(())
    }
}

fn reorder_pair(
    p_hat: &FactorizationPair,
    permute: &FormalMorphism,
    permute_inv: &FormalMorphism,
) -> Result<FactorizationPair> {
    FactorizationPair::new(
        compose(permute, p_hat.iota())?,
        compose(p_hat.f(), permute_inv)?,
    )
}

/// Decides equivalence of two factorizations of the same plot shape. Equal
/// composites produce the explicit chain: embed both pairs, reorder and
/// shear them into standard position, and connect the rectified pairs
/// through the witness span (alpha . iota, phi). Unequal composites report
/// the first differing component.
pub fn decide_equivalence(p: &FactorizationPair, q: &FactorizationPair) -> Result<Decision> {
    if let Some(component) = first_differing_component(p, q)? {
        return Ok(Decision::NotEquivalent { component });
    }
    if p == q {
        let chain = EquivalenceChain { left: p.clone(), right: q.clone(), steps: Vec::new() };
        chain.verify()?;
        return Ok(Decision::Equivalent(chain));
    }

    let (p_hat, p_embed) = embed_factorization(p)?;
    let (q_hat, q_embed) = embed_factorization(q)?;
    let sr = shear_rectify(p_hat.iota())?;
    let sr_q = shear_rectify(q_hat.iota())?;

    let p_reord = reorder_pair(&p_hat, &sr.permute, &sr.permute_inv)?;
    let p_rect = FactorizationPair::new(
        sr.rectified.clone(),
        compose(p_reord.f(), &sr.shear_inv)?,
    )?;
    let q_reord = reorder_pair(&q_hat, &sr_q.permute, &sr_q.permute_inv)?;
    let q_rect = FactorizationPair::new(
        sr_q.rectified.clone(),
        compose(q_reord.f(), &sr_q.shear_inv)?,
    )?;

    let span = witness_general(p_rect.iota(), p_rect.f(), q_rect.iota(), q_rect.f())?;
    let middle = FactorizationPair::new(
        compose(&span.alpha, p_rect.iota())?,
        span.phi.clone(),
    )?;

    let steps = vec![
        RelationStep {
            from: p.clone(),
            to: p_hat.clone(),
            connecting: p_embed.connecting.clone(),
            direction: Direction::Backward,
        },
        RelationStep {
            from: p_hat,
            to: p_reord.clone(),
            connecting: sr.permute.clone(),
            direction: Direction::Forward,
        },
        RelationStep {
            from: p_reord,
            to: p_rect.clone(),
            connecting: sr.shear.clone(),
            direction: Direction::Forward,
        },
        RelationStep {
            from: p_rect,
            to: middle.clone(),
            connecting: span.alpha.clone(),
            direction: Direction::Forward,
        },
        RelationStep {
            from: middle,
            to: q_rect.clone(),
            connecting: span.alpha_prime.clone(),
            direction: Direction::Backward,
        },
        RelationStep {
            from: q_rect,
            to: q_reord.clone(),
            connecting: sr_q.shear.clone(),
            direction: Direction::Backward,
        },
        RelationStep {
            from: q_reord,
            to: q_hat.clone(),
            connecting: sr_q.permute.clone(),
            direction: Direction::Backward,
        },
        RelationStep {
            from: q_hat,
            to: q.clone(),
            connecting: q_embed.connecting.clone(),
            direction: Direction::Forward,
        },
    ];
    let chain = EquivalenceChain { left: p.clone(), right: q.clone(), steps };
    chain.verify()?;
    Ok(Decision::Equivalent(chain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_polynomial;
    use crate::weil::WeilAlgebra;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn d1_space(var: &str) -> FormalSpace {
        let algebra = WeilAlgebra::new(
            format!("D[{var}]"),
            vec![var.to_string()],
            vec![p(&format!("{var}^2"))],
            4,
        )
        .unwrap();
        FormalSpace::thickened_point(algebra)
    }

    fn cart(name: &str, coords: &[&str]) -> FormalSpace {
        FormalSpace::cartesian(name, coords.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn mor(source: &FormalSpace, target: &FormalSpace, comps: &[&str]) -> FormalMorphism {
        FormalMorphism::new(
            source.clone(),
            target.clone(),
            comps.iter().map(|s| p(s)).collect(),
        )
        .unwrap()
    }

    /// The running first-order example: both factorizations of the plot [t]
    /// of D^1(1) at plot length 1.
    fn worked_pairs() -> (FactorizationPair, FactorizationPair) {
        let disk = d1_space("t");
        let v = cart("V", &["t", "x"]);
        let v_prime = cart("V'", &["t", "x"]);
        let iota = mor(&disk, &v, &["t", "0"]);
        let f = mor(&v, &cart("R", &["y1"]), &["t + x"]);
        let iota_prime = mor(&disk, &v_prime, &["t", "0"]);
        let f_prime = mor(&v_prime, &cart("R", &["y1"]), &["t + x + t^2"]);
        (
            FactorizationPair::new(iota, f).unwrap(),
            FactorizationPair::new(iota_prime, f_prime).unwrap(),
        )
    }

    #[test]
    fn composites_reduce_in_the_source() {
        let (pair, pair_prime) = worked_pairs();
        assert_eq!(pair.composite().components()[0].value(), &p("t"));
        assert_eq!(pair_prime.composite().components()[0].value(), &p("t"));
        assert!(equal_composites(&pair, &pair_prime).unwrap());
    }

    #[test]
    fn unequal_composites_are_detected() {
        let (pair, _) = worked_pairs();
        let disk = d1_space("t");
        let v = cart("V", &["t", "x"]);
        let other = FactorizationPair::new(
            mor(&disk, &v, &["t", "0"]),
            mor(&v, &cart("R", &["y1"]), &["t + x + 1"]),
        )
        .unwrap();
        assert!(!equal_composites(&pair, &other).unwrap());

        let short = FactorizationPair::new(
            mor(&disk, &v, &["t", "0"]),
            mor(&v, &cart("R", &["y1", "y2"]), &["t", "0"]),
        )
        .unwrap();
        assert!(equal_composites(&pair, &short).is_err());
    }

    #[test]
    fn embedding_adds_slots_and_verifies() {
        let disk = d1_space("x");
        let v = cart("V", &["v"]);
        let pair = FactorizationPair::new(
            mor(&disk, &v, &["x"]),
            mor(&v, &cart("R", &["y1"]), &["v^2"]),
        )
        .unwrap();
        let (hat, step) = embed_factorization(&pair).unwrap();
        assert_eq!(hat.middle().coords().len(), 2);
        assert_eq!(hat.iota().component_polys(), vec![p("x"), p("x")]);
        step.verify().unwrap();
        assert!(equal_composites(&pair, &hat).unwrap());

        // with parameters the identity block joins in
        let space = FormalSpace::new("UxD", vec!["u".into()], disk.thickening().clone()).unwrap();
        let w = cart("V", &["a", "b"]);
        let pair = FactorizationPair::new(
            mor(&space, &w, &["u + x", "u"]),
            mor(&w, &cart("R", &["y1"]), &["a*b"]),
        )
        .unwrap();
        let (hat, step) = embed_factorization(&pair).unwrap();
        assert_eq!(hat.middle().coords().len(), 4);
        assert_eq!(
            hat.iota().component_polys(),
            vec![p("u + x"), p("u"), p("u"), p("x")]
        );
        step.verify().unwrap();
    }

    #[test]
    fn witness_d1_worked_example() {
        let (pair, pair_prime) = worked_pairs();
        let span = witness_d1(pair.iota(), pair.f(), pair_prime.iota(), pair_prime.f()).unwrap();
        assert_eq!(span.delta, vec![p("t^2")]);
        assert_eq!(span.mu, vec![vec![p("1")]]);
        assert_eq!(span.h, vec![p("t^2")]);
        assert_eq!(span.phi.component_polys(), vec![p("t + x + x' + j1")]);
        assert_eq!(span.w.coords().len(), 5);
        span.verify(pair.iota(), pair.f(), pair_prime.iota(), pair_prime.f()).unwrap();
    }

    #[test]
    fn witness_d1_diagonal_case() {
        let disk = d1_space("t");
        let v = cart("V", &["s", "x"]);
        let iota = mor(&disk, &v, &["t", "0"]);
        let f = mor(&v, &cart("R", &["y1"]), &["s*x + s"]);
        let span = witness_d1(&iota, &f, &iota, &f).unwrap();
        assert_eq!(span.delta, vec![Polynomial::zero()]);
        assert_eq!(span.mu, vec![vec![Polynomial::zero()]]);
    }

    #[test]
    fn witness_d1_cubic_pattern() {
        let disk = d1_space("t");
        let v = cart("V", &["s", "x"]);
        let iota = mor(&disk, &v, &["t", "0"]);
        let f = mor(&v, &cart("R", &["y1"]), &["s^2"]);
        let f_prime = mor(&v, &cart("R", &["y1"]), &["s^2 + s^3"]);
        let span = witness_d1(&iota, &f, &iota, &f_prime).unwrap();
        assert_eq!(span.delta, vec![p("t^3")]);
        assert_eq!(span.mu, vec![vec![p("t")]]);
    }

    #[test]
    fn witness_d1_rectifies_internally() {
        // iota lands diagonally and f' differs by a square; the span must
        // still verify against the original inputs
        let disk = d1_space("t");
        let v = cart("V", &["s", "x"]);
        let iota = mor(&disk, &v, &["t", "t"]);
        let f = mor(&v, &cart("R", &["y1"]), &["s + x"]);
        let f_prime = mor(&v, &cart("R", &["y1"]), &["s + x + s^2"]);
        let span = witness_d1(&iota, &f, &iota, &f_prime).unwrap();
        span.verify(&iota, &f, &iota, &f_prime).unwrap();
        assert_eq!(span.delta, vec![p("t^2")]);
    }

    #[test]
    fn witness_d1_requires_monos() {
        let disk = d1_space("t");
        let v = cart("V", &["s"]);
        let zero = mor(&disk, &v, &["0"]);
        let f = mor(&v, &cart("R", &["y1"]), &["s"]);
        assert!(matches!(
            witness_d1(&zero, &f, &zero, &f),
            Err(KernelError::NotMono { .. })
        ));
    }

    #[test]
    fn witness_d1_rejects_nonvanishing_jets() {
        let (pair, _) = worked_pairs();
        let v = pair.iota().target().clone();
        let f_prime = mor(&v, &cart("R", &["y1"]), &["t + x + t^2 + t"]);
        assert!(matches!(
            witness_d1(pair.iota(), pair.f(), pair.iota(), &f_prime),
            Err(KernelError::NonvanishingJet { .. })
        ));
    }

    #[test]
    fn witness_point_agrees_with_witness_d1() {
        let (pair, pair_prime) = worked_pairs();
        let d1 = witness_d1(pair.iota(), pair.f(), pair_prime.iota(), pair_prime.f()).unwrap();
        let pt = witness_point(pair.iota(), pair.f(), pair_prime.iota(), pair_prime.f()).unwrap();
        assert_eq!(d1.phi.component_polys(), pt.phi.component_polys());
        assert_eq!(d1.delta, pt.delta);
        assert_eq!(d1.mu, pt.mu);
        assert_eq!(d1.h, pt.h);
    }

    #[test]
    fn witness_point_mixed_algebra() {
        let algebra = WeilAlgebra::new(
            "M",
            vec!["x".into(), "y".into()],
            vec![p("x^2"), p("x*y"), p("y^3")],
            4,
        )
        .unwrap();
        let disk = FormalSpace::thickened_point(algebra);
        let v = cart("V", &["a", "b", "c"]);
        let iota = mor(&disk, &v, &["x", "y", "0"]);
        let f = mor(&v, &cart("R", &["y1", "y2"]), &["a + b*c", "a*b - c"]);
        // f' = f + h_i r_i along the zero section
        let f_prime = mor(
            &v,
            &cart("R", &["y1", "y2"]),
            &["a + b*c + a^2 - b^3", "a*b - c + 7*a*b"],
        );
        let span = witness_point(&iota, &f, &iota, &f_prime).unwrap();
        span.verify(&iota, &f, &iota, &f_prime).unwrap();
        assert_eq!(span.h.len(), 3);
        assert_eq!(span.w.coords().len(), 3 + 3 + 3);

        let not_in_ideal = mor(&v, &cart("R", &["y1", "y2"]), &["a + b*c + a", "a*b - c"]);
        assert!(matches!(
            witness_point(&iota, &f, &iota, &not_in_ideal),
            Err(KernelError::NotInIdeal { .. })
        ));
    }

    #[test]
    fn witness_general_parameterized() {
        let disk = d1_space("t");
        let space = FormalSpace::new("UxD", vec!["u".into()], disk.thickening().clone()).unwrap();
        let v = cart("V", &["a", "s", "x"]);
        let iota = mor(&space, &v, &["u", "t", "0"]);
        let f = mor(&v, &cart("R", &["y1"]), &["a*s + x"]);
        let f_prime = mor(&v, &cart("R", &["y1"]), &["a*s + x + a*s^2"]);
        let span = witness_general(&iota, &f, &iota, &f_prime).unwrap();
        assert_eq!(span.delta, vec![p("u*t^2")]);
        assert_eq!(span.mu, vec![vec![p("u")]]);
        span.verify(&iota, &f, &iota, &f_prime).unwrap();
    }

    #[test]
    fn witness_general_requires_standard_position() {
        let disk = d1_space("t");
        let v = cart("V", &["s", "x"]);
        let sheared = mor(&disk, &v, &["t", "t"]);
        let f = mor(&v, &cart("R", &["y1"]), &["s"]);
        assert!(matches!(
            witness_general(&sheared, &f, &sheared, &f),
            Err(KernelError::NotRectified { .. })
        ));
    }

    #[test]
    fn lift_plot_is_a_section_of_composite() {
        let disk = d1_space("e");
        let space = FormalSpace::new("UxD", vec!["u".into()], disk.thickening().clone()).unwrap();
        let plot = mor(&space, &cart("R", &["y1", "y2"]), &["u + e", "e^2"]);
        let pair = lift_plot(&plot).unwrap();
        assert_eq!(pair.middle().params(), ["u", "e"]);
        assert_eq!(pair.f().component_polys(), vec![p("u + e"), p("0")]);
        assert_eq!(pair.composite().components(), plot.components());

        let zero = mor(&space, &cart("R", &["y1"]), &["0"]);
        let pair = lift_plot(&zero).unwrap();
        assert!(pair.f().components()[0].is_zero());
    }

    #[test]
    fn decide_equivalence_on_the_worked_pairs() {
        let (pair, pair_prime) = worked_pairs();
        match decide_equivalence(&pair, &pair_prime).unwrap() {
            Decision::Equivalent(chain) => {
                assert_eq!(chain.steps.len(), 8);
                chain.verify().unwrap();
                // embedding adds one slot per source coordinate, the span
                // space is V_hat x V_hat' x R^1
                let middle = &chain.steps[3].to;
                let hat = pair.middle().coords().len() + 1;
                let hat_prime = pair_prime.middle().coords().len() + 1;
                assert_eq!(middle.middle().coords().len(), hat + hat_prime + 1);
            }
            Decision::NotEquivalent { .. } => panic!("expected a chain"),
        }
    }

    #[test]
    fn decide_equivalence_identical_pairs() {
        let (pair, _) = worked_pairs();
        match decide_equivalence(&pair, &pair).unwrap() {
            Decision::Equivalent(chain) => {
                assert!(chain.steps.is_empty());
                chain.verify().unwrap();
            }
            Decision::NotEquivalent { .. } => panic!("expected the empty chain"),
        }
    }

    #[test]
    fn decide_equivalence_detects_difference() {
        let (pair, _) = worked_pairs();
        let disk = d1_space("t");
        let v = cart("V", &["t", "x"]);
        let other = FactorizationPair::new(
            mor(&disk, &v, &["t", "0"]),
            mor(&v, &cart("R", &["y1"]), &["t + x + 3"]),
        )
        .unwrap();
        match decide_equivalence(&pair, &other).unwrap() {
            Decision::NotEquivalent { component } => assert_eq!(component, 0),
            Decision::Equivalent(_) => panic!("expected not-equivalent"),
        }
    }

    #[test]
    fn decide_equivalence_with_parameters() {
        let disk = d1_space("e");
        let space = FormalSpace::new("UxD", vec!["u".into()], disk.thickening().clone()).unwrap();
        let v = cart("V", &["a", "b"]);
        let pair = FactorizationPair::new(
            mor(&space, &v, &["u", "e"]),
            mor(&v, &cart("R", &["y1", "y2"]), &["a + b", "a*b"]),
        )
        .unwrap();
        let w = cart("W0", &["c", "d", "g"]);
        let other = FactorizationPair::new(
            mor(&space, &w, &["u + e", "u", "e"]),
            mor(&w, &cart("R", &["y1", "y2"]), &["c", "d*g"]),
        )
        .unwrap();
        // composites: (u + e, u e) both times
        assert!(equal_composites(&pair, &other).unwrap());
        match decide_equivalence(&pair, &other).unwrap() {
            Decision::Equivalent(chain) => {
                assert_eq!(chain.steps.len(), 8);
                chain.verify().unwrap();
            }
            Decision::NotEquivalent { .. } => panic!("expected a chain"),
        }
    }

    #[test]
    fn relation_step_verification_rejects_broken_triangles() {
        let (pair, _) = worked_pairs();
        let (hat, step) = embed_factorization(&pair).unwrap();
        let broken = RelationStep {
            from: hat.clone(),
            to: pair.clone(),
            connecting: FormalMorphism::new(
                hat.middle().clone(),
                pair.middle().clone(),
                vec![p("t"), p("0")],
            )
            .unwrap(),
            direction: step.direction,
        };
        assert!(matches!(
            broken.verify(),
            Err(KernelError::WitnessViolation { .. })
        ));
    }
}
