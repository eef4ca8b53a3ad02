//! Jet spaces of the trivial fibrations R^n x R^m -> R^n: coordinate
//! bookkeeping, prolongation of polynomial sections by symbolic
//! differentiation, the order-forgetting projections, the correspondence
//! between jet fibers and sections over infinitesimal disks, and truncated
//! pro-limit plots with their compatibility checks.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{KernelError, Result};
use crate::formal::{compose, FormalMorphism, FormalSpace};
use crate::monomial::{monomial_from_index, multi_indices_up_to};
use crate::poly::Polynomial;
use crate::rational::{binomial, multi_factorial, rat, Rational};
use crate::weil::{WeilAlgebra, WeilElement};

/// Fiber coordinate label for the a-th dependent variable at multi-index
/// sigma. The fiber index is dropped when there is only one.
pub fn fiber_name(m: usize, a: usize, sigma: &[u32]) -> String {
    let idx = sigma.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    if m == 1 {
        format!("u[{idx}]")
    } else {
        format!("u{a}[{idx}]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetSpace {
    pub n: usize,
    pub m: usize,
    pub k: u32,
}

impl JetSpace {
    pub fn fiber_count(&self) -> usize {
        self.m * binomial(self.n as u64 + self.k as u64, self.n as u64) as usize
    }

    /// Base coordinates x1..xn, then fiber coordinates by dependent
    /// variable, degree-ascending within each.
    pub fn coordinate_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.n).map(|i| format!("x{i}")).collect();
        for a in 1..=self.m {
            for sigma in multi_indices_up_to(self.n, self.k) {
                names.push(fiber_name(self.m, a, &sigma));
            }
        }
        names
    }

    pub fn space(&self) -> FormalSpace {
        FormalSpace::cartesian(format!("J{}", self.k), self.coordinate_names())
            .expect("jet coordinate names are distinct")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    n: usize,
    m: usize,
    k: u32,
    base: Vec<Rational>,
    values: BTreeMap<(usize, Vec<u32>), Rational>,
}

impl JetPoint {
    pub fn new(
        n: usize,
        m: usize,
        k: u32,
        base: Vec<Rational>,
        values: BTreeMap<(usize, Vec<u32>), Rational>,
    ) -> Result<Self> {
        if base.len() != n {
            return Err(KernelError::invalid(format!(
                "base point has {} entries, expected {n}",
                base.len()
            )));
        }
        let mut expected = BTreeSet::new();
        for a in 1..=m {
            for sigma in multi_indices_up_to(n, k) {
                expected.insert((a, sigma));
            }
        }
        let got: BTreeSet<(usize, Vec<u32>)> = values.keys().cloned().collect();
        if got != expected {
            let mut diff = expected.symmetric_difference(&got);
            let (a, sigma) = diff.next().expect("sets differ");
            return Err(KernelError::invalid(format!(
                "jet entry set does not match (n,m,k), first mismatch at {}",
                fiber_name(m, *a, sigma)
            )));
        }
        Ok(JetPoint { n, m, k, base, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn base(&self) -> &[Rational] {
        &self.base
    }

    pub fn values(&self) -> &BTreeMap<(usize, Vec<u32>), Rational> {
        &self.values
    }

    pub fn value(&self, a: usize, sigma: &[u32]) -> Option<&Rational> {
        self.values.get(&(a, sigma.to_vec()))
    }
}

/// Records all partial derivatives of the sections up to order k at the
/// base point: the entry at (a, sigma) is d^sigma s^a evaluated there.
pub fn prolong(
    sections: &[Polynomial],
    x_vars: &[String],
    k: u32,
    base: &[Rational],
) -> Result<JetPoint> {
    let n = x_vars.len();
    let m = sections.len();
    if base.len() != n {
        return Err(KernelError::invalid(format!(
            "base point has {} entries, expected {n}",
            base.len()
        )));
    }
    let allowed: BTreeSet<&str> = x_vars.iter().map(|s| s.as_str()).collect();
    for s in sections {
        for v in s.occurring_vars() {
            if !allowed.contains(v.as_str()) {
                return Err(KernelError::MissingVariable { var: v });
            }
        }
    }
    let point: BTreeMap<String, Rational> =
        x_vars.iter().cloned().zip(base.iter().cloned()).collect();
    let mut values = BTreeMap::new();
    for (a, s) in sections.iter().enumerate() {
        for sigma in multi_indices_up_to(n, k) {
            let value = s.derivative_multi(x_vars, &sigma).eval(&point)?;
            values.insert((a + 1, sigma), value);
        }
    }
    JetPoint::new(n, m, k, base.to_vec(), values)
}

/// Forgets the order-k entries.
pub fn project(p: &JetPoint) -> Result<JetPoint> {
    if p.k == 0 {
        return Err(KernelError::invalid("cannot project below order 0"));
    }
    let values = p
        .values
        .iter()
        .filter(|((_, sigma), _)| sigma.iter().sum::<u32>() < p.k)
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    JetPoint::new(p.n, p.m, p.k - 1, p.base.clone(), values)
}

fn require_full_disk(disk: &WeilAlgebra) -> Result<()> {
    let monomials: BTreeSet<_> = disk.basis().iter().cloned().collect();
    for sigma in multi_indices_up_to(disk.d(), disk.k()) {
        let m = monomial_from_index(disk.vars(), &sigma);
        if !monomials.contains(&m) {
            return Err(KernelError::invalid(format!(
                "algebra is not a full disk: {m} is not a basis monomial"
            )));
        }
    }
    Ok(())
}

/// Reads a jet at base 0 off m elements of the disk algebra: the (a, sigma)
/// entry is sigma! times the eps^sigma coefficient of the a-th element.
pub fn disk_section_to_jet(disk: &WeilAlgebra, sections: &[WeilElement]) -> Result<JetPoint> {
    require_full_disk(disk)?;
    let n = disk.d();
    let k = disk.k();
    let mut values = BTreeMap::new();
    for (a, e) in sections.iter().enumerate() {
        for v in e.value().occurring_vars() {
            if !disk.vars().contains(&v) {
                return Err(KernelError::invalid(format!(
                    "element {} has the parameter {v}; jets need constant coefficients",
                    e.value()
                )));
            }
        }
        for sigma in multi_indices_up_to(n, k) {
            let m = monomial_from_index(disk.vars(), &sigma);
            let coeff = e.value().coefficient(&m);
            values.insert((a + 1, sigma.clone()), coeff * multi_factorial(&sigma));
        }
    }
    JetPoint::new(n, sections.len(), k, vec![rat(0); n], values)
}

/// Inverse of [`disk_section_to_jet`]: the a-th element is
/// sum(u^a_sigma / sigma! eps^sigma). The base point is not part of the
/// disk data and is dropped.
pub fn jet_to_disk_section(jet: &JetPoint, disk: &WeilAlgebra) -> Result<Vec<WeilElement>> {
    require_full_disk(disk)?;
    if disk.d() != jet.n || disk.k() != jet.k {
        return Err(KernelError::TypeMismatch {
            expected: format!("disk of dimension {} and order {}", jet.n, jet.k),
            found: format!("dimension {} and order {}", disk.d(), disk.k()),
        });
    }
    let mut out = Vec::with_capacity(jet.m);
    for a in 1..=jet.m {
        let mut p = Polynomial::zero();
        for sigma in multi_indices_up_to(jet.n, jet.k) {
            let value = jet.value(a, &sigma).expect("complete entry set");
            let coeff = value / multi_factorial(&sigma);
            p = &p + &Polynomial::term(coeff, monomial_from_index(disk.vars(), &sigma));
        }
        out.push(disk.nf(&p));
    }
    Ok(out)
}

/// Which projective system a truncated plot lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProSystem {
    /// R^1 <- R^2 <- ... with the coordinate-dropping projections; level k
    /// is a plot into R^k, for k = 1..K.
    RInfinity,
    /// J^0 <- J^1 <- ... for the trivial fibration; level k is a plot into
    /// the order-k jet space, for k = 0..K.
    Jet { n: usize, m: usize },
}

/// A cone over an initial segment of a projective system: one plot per
/// level, expected to be compatible with the projections. Compatibility is
/// checked by [`TruncatedProPlot::verify_compatible`], not at construction,
/// so broken families can be built and diagnosed.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedProPlot {
    system: ProSystem,
    source: FormalSpace,
    levels: Vec<FormalMorphism>,
}

impl TruncatedProPlot {
    pub fn new(
        system: ProSystem,
        source: FormalSpace,
        levels: Vec<FormalMorphism>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(KernelError::invalid("a truncated plot needs at least one level"));
        }
        for (i, level) in levels.iter().enumerate() {
            if level.source() != &source {
                return Err(KernelError::TypeMismatch {
                    expected: format!("source {source}"),
                    found: format!("{} at level {}", level.source(), i),
                });
            }
            let expected = match system {
                ProSystem::RInfinity => FormalSpace::standard_r(i + 1),
                ProSystem::Jet { n, m } => JetSpace { n, m, k: i as u32 }.space(),
            };
            if level.target() != &expected {
                return Err(KernelError::TypeMismatch {
                    expected: format!("target {expected}"),
                    found: format!("{} at level {}", level.target(), i),
                });
            }
        }
        Ok(TruncatedProPlot { system, source, levels })
    }

    pub fn system(&self) -> ProSystem {
        self.system
    }

    pub fn source(&self) -> &FormalSpace {
        &self.source
    }

    pub fn levels(&self) -> &[FormalMorphism] {
        &self.levels
    }

    /// The level number of the top entry: K for R-infinity families
    /// (levels 1..K) and K for jet families (levels 0..K).
    pub fn top_level(&self) -> usize {
        match self.system {
            ProSystem::RInfinity => self.levels.len(),
            ProSystem::Jet { .. } => self.levels.len() - 1,
        }
    }

    fn level_number(&self, index: usize) -> usize {
        match self.system {
            ProSystem::RInfinity => index + 1,
            ProSystem::Jet { .. } => index,
        }
    }

    /// Every level must agree with the next one under the projection,
    /// matched up coordinate by coordinate (lower-level coordinate names are
    /// a subset of the higher level's).
    pub fn verify_compatible(&self) -> Result<()> {
        for i in 1..self.levels.len() {
            let lower = &self.levels[i - 1];
            let upper = &self.levels[i];
            let upper_coords = upper.target().coords();
            let index: BTreeMap<&String, usize> =
                upper_coords.iter().enumerate().map(|(j, c)| (c, j)).collect();
            for (j, c) in lower.target().coords().iter().enumerate() {
                let uj = index[&c];
                if lower.components()[j] != upper.components()[uj] {
                    return Err(KernelError::IncompatibleCone {
                        level: self.level_number(i),
                        coordinate: c.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A compatible cone is the same data as its top plot.
pub fn cone_to_plot(plot: &TruncatedProPlot) -> Result<FormalMorphism> {
    plot.verify_compatible()?;
    Ok(plot.levels().last().expect("nonempty").clone())
}

/// Rebuilds the cone under a single top-level plot by restricting to each
/// level's coordinates.
pub fn plot_to_cone(system: ProSystem, top: &FormalMorphism) -> Result<TruncatedProPlot> {
    let coords = top.target().coords();
    let top_level = match system {
        ProSystem::RInfinity => {
            if top.target() != &FormalSpace::standard_r(coords.len()) {
                return Err(KernelError::TypeMismatch {
                    expected: format!("{}", FormalSpace::standard_r(coords.len())),
                    found: format!("{}", top.target()),
                });
            }
            coords.len()
        }
        ProSystem::Jet { n, m } => {
            let mut found = None;
            for k in 0.. {
                let space = JetSpace { n, m, k };
                let count = n + space.fiber_count();
                if count == coords.len() && top.target() == &space.space() {
                    found = Some(k);
                    break;
                }
                if count >= coords.len() {
                    break;
                }
            }
            found.ok_or_else(|| KernelError::TypeMismatch {
                expected: format!("a jet space for n={n}, m={m}"),
                found: format!("{}", top.target()),
            })? as usize
        }
    };
    let index: BTreeMap<String, usize> =
        coords.iter().enumerate().map(|(j, c)| (c.clone(), j)).collect();
    let mut levels = Vec::new();
    let range = match system {
        ProSystem::RInfinity => 1..=top_level,
        ProSystem::Jet { .. } => 0..=top_level,
    };
    for level in range {
        let target = match system {
            ProSystem::RInfinity => FormalSpace::standard_r(level),
            ProSystem::Jet { n, m } => JetSpace { n, m, k: level as u32 }.space(),
        };
        let components: Vec<Polynomial> = target
            .coords()
            .iter()
            .map(|c| top.components()[index[c]].value().clone())
            .collect();
        levels.push(FormalMorphism::new(top.source().clone(), target, components)?);
    }
    TruncatedProPlot::new(system, top.source().clone(), levels)
}

/// A jet plot factored through an ordinary Cartesian space: iota is the
/// canonical inclusion of U x D into V = U x R^d and the composite
/// through . iota reproduces the plot at every level.
#[derive(Clone, Debug)]
pub struct JetPlotLift {
    pub space: FormalSpace,
    pub iota: FormalMorphism,
    pub through: FormalMorphism,
}

/// Lifts a compatible jet-system plot of U x D through U x R^d by taking
/// the normal-form polynomial representative of every component.
pub fn lift_jet_plot(plot: &TruncatedProPlot) -> Result<JetPlotLift> {
    if !matches!(plot.system(), ProSystem::Jet { .. }) {
        return Err(KernelError::shape("lift_jet_plot needs a jet-system plot"));
    }
    plot.verify_compatible()?;
    let source = plot.source().clone();
    let space = FormalSpace::cartesian(format!("{}_lift", source.name()), source.coords())?;
    let iota = FormalMorphism::new(
        source.clone(),
        space.clone(),
        source.coords().iter().map(|c| Polynomial::var(c)).collect(),
    )?;
    let top = plot.levels().last().expect("nonempty");
    let through = FormalMorphism::new(
        space.clone(),
        top.target().clone(),
        top.component_polys(),
    )?;
    // composite equality at every level, not just the top
    let full = compose(&through, &iota)?;
    let index: BTreeMap<String, usize> = top
        .target()
        .coords()
        .into_iter()
        .enumerate()
        .map(|(j, c)| (c, j))
        .collect();
    for (i, level) in plot.levels().iter().enumerate() {
        for (j, c) in level.target().coords().iter().enumerate() {
            if level.components()[j] != full.components()[index[c]] {
                return Err(KernelError::IncompatibleCone {
                    level: plot.level_number(i),
                    coordinate: c.clone(),
                });
            }
        }
    }
    Ok(JetPlotLift { space, iota, through })
}
