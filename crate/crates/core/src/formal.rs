//! Formal Cartesian spaces U x D (a Cartesian factor with named parameter
//! coordinates times an infinitesimally thickened point) and their morphisms.
//! A morphism is stored dually, as the tuple of coordinate pullbacks: one
//! normal-form element of the source algebra per target coordinate. The
//! constructor checks well-definedness, so composition is plain substitution
//! plus normal form. Also here: the monomorphism and embedding predicates and
//! the two rectification moves (affine and shear) that bring embeddings into
//! the standard position (u, eps, 0).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use crate::error::{KernelError, Result};
use crate::linalg::{Matrix, SpanBuilder};
use crate::poly::Polynomial;
use crate::rational::Rational;
use crate::weil::{fresh_name, WeilAlgebra, WeilElement};

#[derive(Clone, Debug)]
pub struct FormalSpace {
    name: String,
    params: Vec<String>,
    thickening: WeilAlgebra,
}

impl PartialEq for FormalSpace {
    // names are labels; the shape is the parameter list plus the presented
    // algebra
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.thickening == other.thickening
    }
}

impl Eq for FormalSpace {}

impl std::fmt::Display for FormalSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(", self.name)?;
        write!(f, "{}", self.params.join(","))?;
        if !self.thickening.is_point() {
            if !self.params.is_empty() {
                write!(f, ";")?;
            }
            write!(f, "{}", self.thickening.vars().join(","))?;
        }
        write!(f, ")")
    }
}

impl FormalSpace {
    pub fn new(
        name: impl Into<String>,
        params: Vec<String>,
        thickening: WeilAlgebra,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in params.iter().chain(thickening.vars().iter()) {
            if !seen.insert(c.clone()) {
                return Err(KernelError::invalid(format!("repeated coordinate {c}")));
            }
        }
        Ok(FormalSpace { name: name.into(), params, thickening })
    }

    /// An ordinary Cartesian space: trivial thickening.
    pub fn cartesian(name: impl Into<String>, params: Vec<String>) -> Result<Self> {
        FormalSpace::new(name, params, WeilAlgebra::point())
    }

    /// R^k with coordinates y1..yk.
    pub fn standard_r(k: usize) -> Self {
        let params = (1..=k).map(|i| format!("y{i}")).collect();
        FormalSpace::cartesian(format!("R{k}"), params).expect("fresh coordinates")
    }

    /// A pure thickened point.
    pub fn thickened_point(algebra: WeilAlgebra) -> Self {
        let name = algebra.name().to_string();
        FormalSpace::new(name, Vec::new(), algebra).expect("no parameters to collide")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn eps(&self) -> &[String] {
        self.thickening.vars()
    }

    pub fn thickening(&self) -> &WeilAlgebra {
        &self.thickening
    }

    /// All coordinates, parameters first.
    pub fn coords(&self) -> Vec<String> {
        self.params.iter().chain(self.eps().iter()).cloned().collect()
    }

    pub fn is_cartesian(&self) -> bool {
        self.thickening.is_point()
    }

    /// Product space. Colliding coordinates of `other` pick up primes; the
    /// returned map records every rename applied to `other`'s coordinates.
    pub fn product(&self, other: &FormalSpace) -> (FormalSpace, BTreeMap<String, String>) {
        let mut taken: BTreeSet<String> = self.coords().into_iter().collect();
        let mut renames = BTreeMap::new();
        let mut params = self.params.clone();
        for p in &other.params {
            let fresh = fresh_name(p, &taken);
            taken.insert(fresh.clone());
            if fresh != *p {
                renames.insert(p.clone(), fresh.clone());
            }
            params.push(fresh);
        }
        let (thickening, algebra_renames) = self.thickening.tensor_avoiding(&other.thickening, &taken);
        renames.extend(algebra_renames);
        let space = FormalSpace {
            name: format!("{}x{}", self.name, other.name),
            params,
            thickening,
        };
        (space, renames)
    }
}

/// A morphism of formal spaces, as the tuple of coordinate pullbacks: entry i
/// is the normal-form source element that target coordinate i pulls back to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalMorphism {
    source: FormalSpace,
    target: FormalSpace,
    components: Vec<WeilElement>,
}

impl std::fmt::Display for FormalMorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl FormalMorphism {
    /// Validates and normalizes the components: right count, only source
    /// coordinates, nilpotent entries at the target's eps slots, and the
    /// target relations pull back to zero.
    pub fn new(
        source: FormalSpace,
        target: FormalSpace,
        components: Vec<Polynomial>,
    ) -> Result<Self> {
        let coords = target.coords();
        if components.len() != coords.len() {
            return Err(KernelError::TypeMismatch {
                expected: format!("{} components for target {}", coords.len(), target),
                found: format!("{}", components.len()),
            });
        }
        let allowed: BTreeSet<String> = source.coords().into_iter().collect();
        for c in &components {
            for v in c.occurring_vars() {
                if !allowed.contains(&v) {
                    return Err(KernelError::MissingVariable { var: v });
                }
            }
        }
        let components: Vec<WeilElement> =
            components.iter().map(|c| source.thickening().nf(c)).collect();
        for (i, c) in components.iter().enumerate().skip(target.params().len()) {
            if !source.thickening().is_nilpotent_element(c) {
                return Err(KernelError::invalid(format!(
                    "component for {} must be nilpotent, got {}",
                    coords[i], c
                )));
            }
        }
        let map: BTreeMap<String, Polynomial> = coords
            .iter()
            .cloned()
            .zip(components.iter().map(|c| c.value().clone()))
            .collect();
        for g in target.thickening().generators() {
            let pulled = g.substitute(&map)?;
            if !source.thickening().nf(&pulled).is_zero() {
                return Err(KernelError::invalid(format!(
                    "target relation {g} does not pull back to zero"
                )));
            }
        }
        Ok(FormalMorphism { source, target, components })
    }

    pub fn identity(space: &FormalSpace) -> Self {
        let components = space.coords().iter().map(|c| Polynomial::var(c)).collect();
        FormalMorphism::new(space.clone(), space.clone(), components)
            .expect("coordinates name themselves")
    }

    pub fn source(&self) -> &FormalSpace {
        &self.source
    }

    pub fn target(&self) -> &FormalSpace {
        &self.target
    }

    pub fn components(&self) -> &[WeilElement] {
        &self.components
    }

    pub fn component_polys(&self) -> Vec<Polynomial> {
        self.components.iter().map(|c| c.value().clone()).collect()
    }
}

/// g after f. Componentwise substitution of f's components into g's,
/// renormalized in f's source.
pub fn compose(g: &FormalMorphism, f: &FormalMorphism) -> Result<FormalMorphism> {
    if f.target != g.source {
        return Err(KernelError::TypeMismatch {
            expected: format!("source {}", f.target),
            found: format!("{}", g.source),
        });
    }
    let map: BTreeMap<String, Polynomial> = g
        .source
        .coords()
        .into_iter()
        .zip(f.components.iter().map(|c| c.value().clone()))
        .collect();
    let mut components = Vec::with_capacity(g.components.len());
    for c in &g.components {
        components.push(c.value().substitute(&map)?);
    }
    FormalMorphism::new(f.source.clone(), g.target.clone(), components)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingKind {
    General,
    MonoAtPoint,
    Rectified,
}

#[derive(Clone, Debug)]
pub struct EmbeddingForm {
    pub morphism: FormalMorphism,
    pub kind: EmbeddingKind,
}

pub fn classify_embedding(m: &FormalMorphism) -> EmbeddingForm {
    let kind = if is_rectified(m) {
        EmbeddingKind::Rectified
    } else if m.source().params().is_empty() && is_mono_point(m) == Ok(true) {
        EmbeddingKind::MonoAtPoint
    } else {
        EmbeddingKind::General
    };
    EmbeddingForm { morphism: m.clone(), kind }
}

/// Standard position: Cartesian target, the first components are the source
/// coordinates themselves, the rest are zero.
pub fn is_rectified(m: &FormalMorphism) -> bool {
    if !m.target().is_cartesian() {
        return false;
    }
    let src = m.source().coords();
    if m.components().len() < src.len() {
        return false;
    }
    for (c, v) in m.components().iter().zip(src.iter()) {
        if c.value() != &Polynomial::var(v) {
            return false;
        }
    }
    m.components()[src.len()..].iter().all(|c| c.is_zero())
}

/// Decides whether a map out of a pure thickened point is a monomorphism:
/// the dual algebra map is surjective, i.e. the pulled-back coordinates
/// generate the whole Weil algebra. Decided by a span closure under products
/// on the finite monomial basis.
pub fn is_mono_point(m: &FormalMorphism) -> Result<bool> {
    if !m.source().params().is_empty() {
        return Err(KernelError::shape("source has parameter variables"));
    }
    let algebra = m.source().thickening();
    Ok(span_is_full(algebra, m.components()))
}

fn element_vector(algebra: &WeilAlgebra, e: &WeilElement) -> Vec<Rational> {
    algebra
        .basis_coefficients(e)
        .iter()
        .map(|c| c.constant_part())
        .collect()
}

fn span_is_full(algebra: &WeilAlgebra, generators: &[WeilElement]) -> bool {
    let mut span = SpanBuilder::new();
    span.insert(element_vector(algebra, &algebra.one()));
    let mut frontier = vec![algebra.one()];
    for g in generators {
        if span.insert(element_vector(algebra, g)) {
            frontier.push(g.clone());
        }
    }
    while !frontier.is_empty() && span.dim() < algebra.dim() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in generators {
                let prod = algebra.mul(f, g);
                if span.insert(element_vector(algebra, &prod)) {
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    span.dim() == algebra.dim()
}

/// Formal-embedding test. The restriction to U x {0} must be an injective
/// affine-linear map (refused as undecidable otherwise) and the fiber
/// restriction must be a monomorphism of thickened points. Fiber parts that
/// depend on the parameters are skipped; if the remaining parts already
/// generate, the answer is yes, and if nothing was skipped and they do not,
/// the answer is no. Otherwise the input is refused.
pub fn is_formal_embedding(m: &FormalMorphism) -> Result<bool> {
    let params = m.source().params().to_vec();
    let algebra = m.source().thickening();
    let mut linear_rows = Vec::new();
    let mut fiber_parts = Vec::new();
    let mut skipped = false;
    let mut zero_eps = BTreeMap::new();
    for u in &params {
        zero_eps.insert(u.clone(), Polynomial::var(u));
    }
    for v in algebra.vars() {
        zero_eps.insert(v.clone(), Polynomial::zero());
    }
    for c in m.components() {
        let value = c.value();
        let param_part = value.substitute(&zero_eps)?;
        if param_part.total_degree().unwrap_or(0) > 1 {
            return Err(KernelError::UndecidableInput {
                detail: format!("parameter part {param_part} is not affine-linear"),
            });
        }
        linear_rows.push(
            params
                .iter()
                .map(|u| param_part.coefficient(&crate::monomial::Monomial::var(u)))
                .collect::<Vec<Rational>>(),
        );
        let fiber = value - &param_part;
        if fiber.occurring_vars().iter().any(|v| params.contains(v)) {
            skipped = true;
        } else {
            fiber_parts.push(fiber);
        }
    }
    if Matrix::new(linear_rows).rank() < params.len() {
        return Ok(false);
    }
    let fiber_elements: Vec<WeilElement> =
        fiber_parts.iter().map(|v| algebra.nf(v)).collect();
    if span_is_full(algebra, &fiber_elements) {
        return Ok(true);
    }
    if skipped {
        return Err(KernelError::UndecidableInput {
            detail: "fiber part depends on parameters and the rest does not generate".into(),
        });
    }
    Ok(false)
}

/// Output of [`rectify_affine`]: an exact affine change of target
/// coordinates, its exact inverse, and the rectified morphism.
#[derive(Clone, Debug)]
pub struct Rectification {
    pub diffeo: FormalMorphism,
    pub inverse: FormalMorphism,
    pub rectified: FormalMorphism,
}

/// Affine rectification. The morphism must land in a Cartesian space with
/// affine-linear components whose linear part has full column rank; the
/// returned diffeomorphism translates the image of the origin away and
/// completes the linear part to a basis, after which the composite is in
/// standard position.
pub fn rectify_affine(iota: &FormalMorphism) -> Result<Rectification> {
    if !iota.target().is_cartesian() {
        return Err(KernelError::shape("rectification target must be Cartesian"));
    }
    let src_coords = iota.source().coords();
    let tgt_coords = iota.target().coords();
    let n = tgt_coords.len();
    let q = src_coords.len();
    let mut l_rows = vec![vec![Rational::from_integer(0.into()); q]; n];
    let mut b = vec![Rational::from_integer(0.into()); n];
    for (r, c) in iota.components().iter().enumerate() {
        let value = c.value();
        if value.total_degree().unwrap_or(0) > 1 {
            return Err(KernelError::shape(format!("component {value} is not affine-linear")));
        }
        b[r] = value.constant_part();
        for (j, s) in src_coords.iter().enumerate() {
            l_rows[r][j] = value.coefficient(&crate::monomial::Monomial::var(s));
        }
    }
    let l = Matrix::new(l_rows.clone());
    let pivots: BTreeSet<usize> = l.column_pivot_rows().into_iter().collect();
    if pivots.len() < q {
        return Err(KernelError::RankDeficient { rank: pivots.len(), expected: q });
    }
    let mut b_rows = l_rows;
    let mut extra_rows = Vec::new();
    for r in 0..n {
        if !pivots.contains(&r) {
            extra_rows.push(r);
        }
    }
    for row in b_rows.iter_mut() {
        row.extend(std::iter::repeat(Rational::from_integer(0.into())).take(extra_rows.len()));
    }
    for (j, r) in extra_rows.iter().enumerate() {
        b_rows[*r][q + j] = Rational::one();
    }
    let basis_change = Matrix::new(b_rows);
    let a = basis_change
        .inverse()
        .expect("full column rank completed by unit vectors is invertible");

    let mut taken: BTreeSet<String> = src_coords.iter().cloned().collect();
    let mut std_params: Vec<String> = iota.source().params().to_vec();
    let mut std_eps_names: Vec<String> = iota.source().eps().to_vec();
    let mut fresh_coords = Vec::new();
    for i in 1..=extra_rows.len() {
        let name = fresh_name(&format!("x{i}"), &taken);
        taken.insert(name.clone());
        fresh_coords.push(name);
    }
    std_params.append(&mut std_eps_names);
    std_params.extend(fresh_coords);
    let std_space =
        FormalSpace::cartesian(format!("{}_r", iota.target().name()), std_params)?;

    let shifted: Vec<Polynomial> = tgt_coords
        .iter()
        .zip(b.iter())
        .map(|(y, c)| &Polynomial::var(y) - &Polynomial::constant(c.clone()))
        .collect();
    let diffeo_components: Vec<Polynomial> = (0..n)
        .map(|r| {
            let mut acc = Polynomial::zero();
            for (j, s) in shifted.iter().enumerate() {
                acc = &acc + &s.scale(&a.rows()[r][j]);
            }
            acc
        })
        .collect();
    let diffeo =
        FormalMorphism::new(iota.target().clone(), std_space.clone(), diffeo_components)?;

    let std_coords = std_space.coords();
    let inverse_components: Vec<Polynomial> = (0..n)
        .map(|r| {
            let mut acc = Polynomial::constant(b[r].clone());
            for (j, z) in std_coords.iter().enumerate() {
                acc = &acc + &Polynomial::var(z).scale(&basis_change.rows()[r][j]);
            }
            acc
        })
        .collect();
    let inverse = FormalMorphism::new(std_space, iota.target().clone(), inverse_components)?;

    let rectified = compose(&diffeo, iota)?;
    debug_assert!(is_rectified(&rectified));
    debug_assert_eq!(compose(&diffeo, &inverse)?, FormalMorphism::identity(diffeo.target()));
    debug_assert_eq!(compose(&inverse, &diffeo)?, FormalMorphism::identity(diffeo.source()));
    Ok(Rectification { diffeo, inverse, rectified })
}

/// Output of [`shear_rectify`]: the permutation and shear stages, the
/// combined diffeomorphism with its exact inverse, and the rectified
/// morphism.
#[derive(Clone, Debug)]
pub struct ShearRectification {
    pub permute: FormalMorphism,
    pub permute_inv: FormalMorphism,
    pub shear: FormalMorphism,
    pub shear_inv: FormalMorphism,
    pub diffeo: FormalMorphism,
    pub inverse: FormalMorphism,
    pub rectified: FormalMorphism,
}

/// Rectifies a morphism of the concatenated shape (i, u, eps) into a
/// Cartesian target: first reorder the target coordinates to (u, eps, v),
/// then shear away the i-block by subtracting its polynomial lift. Both
/// stages are exact polynomial diffeomorphisms.
pub fn shear_rectify(iota: &FormalMorphism) -> Result<ShearRectification> {
    if !iota.target().is_cartesian() {
        return Err(KernelError::shape("shear target must be Cartesian"));
    }
    let params = iota.source().params().to_vec();
    let eps = iota.source().eps().to_vec();
    let n = iota.components().len();
    let (q, d) = (params.len(), eps.len());
    if n < q + d {
        return Err(KernelError::shape("too few components for the (i, u, eps) shape"));
    }
    let p = n - q - d;
    for (j, u) in params.iter().enumerate() {
        if iota.components()[p + j].value() != &Polynomial::var(u) {
            return Err(KernelError::shape(format!(
                "component {} must be the parameter {u}",
                p + j
            )));
        }
    }
    for (j, e) in eps.iter().enumerate() {
        if iota.components()[p + q + j].value() != &Polynomial::var(e) {
            return Err(KernelError::shape(format!(
                "component {} must be the coordinate {e}",
                p + q + j
            )));
        }
    }

    let tgt = iota.target().coords();
    let (v_block, rest) = tgt.split_at(p);
    let (u_block, e_block) = rest.split_at(q);
    let mut reordered: Vec<String> = u_block.to_vec();
    reordered.extend(e_block.to_vec());
    reordered.extend(v_block.to_vec());
    let reord_space =
        FormalSpace::cartesian(format!("{}_reord", iota.target().name()), reordered.clone())?;
    let permute = FormalMorphism::new(
        iota.target().clone(),
        reord_space.clone(),
        reordered.iter().map(|c| Polynomial::var(c)).collect(),
    )?;
    let permute_inv = FormalMorphism::new(
        reord_space.clone(),
        iota.target().clone(),
        tgt.iter().map(|c| Polynomial::var(c)).collect(),
    )?;

    // positional dictionary from source coordinates to target slots
    let mut slot_rename = BTreeMap::new();
    for (j, u) in params.iter().enumerate() {
        slot_rename.insert(u.clone(), u_block[j].clone());
    }
    for (j, e) in eps.iter().enumerate() {
        slot_rename.insert(e.clone(), e_block[j].clone());
    }
    let lifts: Vec<Polynomial> = iota.components()[..p]
        .iter()
        .map(|c| c.value().rename_vars(&slot_rename))
        .collect();

    let rect_space = reord_space.clone().with_name(format!("{}_r", iota.target().name()));
    let mut shear_components: Vec<Polynomial> =
        u_block.iter().chain(e_block.iter()).map(|c| Polynomial::var(c)).collect();
    let mut shear_inv_components = shear_components.clone();
    for (j, v) in v_block.iter().enumerate() {
        shear_components.push(&Polynomial::var(v) - &lifts[j]);
        shear_inv_components.push(&Polynomial::var(v) + &lifts[j]);
    }
    let shear = FormalMorphism::new(reord_space.clone(), rect_space.clone(), shear_components)?;
    let shear_inv = FormalMorphism::new(rect_space, reord_space, shear_inv_components)?;

    let diffeo = compose(&shear, &permute)?;
    let inverse = compose(&permute_inv, &shear_inv)?;
    let rectified = compose(&diffeo, iota)?;
    debug_assert!(is_rectified(&rectified));
    debug_assert_eq!(compose(&diffeo, &inverse)?, FormalMorphism::identity(diffeo.target()));
    debug_assert_eq!(compose(&inverse, &diffeo)?, FormalMorphism::identity(diffeo.source()));
    Ok(ShearRectification { permute, permute_inv, shear, shear_inv, diffeo, inverse, rectified })
}
