//! Monomials as exponent maps keyed by variable name, plus the term orders
//! the division and basis algorithms run under. Orders are block orders:
//! variables are grouped, earlier blocks dominate, and ties inside a block are
//! broken by graded reverse lexicographic comparison with respect to the
//! block's variable order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// A power product of named variables. Zero exponents are never stored, so
/// structural equality is monomial equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exps: BTreeMap<String, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(name: &str) -> Self {
        Monomial::var_pow(name, 1)
    }

    pub fn var_pow(name: &str, k: u32) -> Self {
        let mut exps = BTreeMap::new();
        if k > 0 {
            exps.insert(name.to_string(), k);
        }
        Monomial { exps }
    }

    pub fn from_exps(pairs: impl IntoIterator<Item = (String, u32)>) -> Self {
        let mut exps = BTreeMap::new();
        for (v, k) in pairs {
            if k > 0 {
                *exps.entry(v).or_insert(0) += k;
            }
        }
        Monomial { exps }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.values().sum()
    }

    pub fn exp(&self, var: &str) -> u32 {
        self.exps.get(var).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.exps.iter().map(|(v, &k)| (v.as_str(), k))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.exps.keys().map(|v| v.as_str())
    }

    /// Total degree counting only the given variables.
    pub fn degree_in<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> u32 {
        vars.into_iter().map(|v| self.exp(v)).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps.clone();
        for (v, &k) in &other.exps {
            *exps.entry(v.clone()).or_insert(0) += k;
        }
        Monomial { exps }
    }

    /// Whether self divides other.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().all(|(v, &k)| other.exp(v) >= k)
    }

    /// other / self, when self divides other.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = BTreeMap::new();
        for (v, &k) in &other.exps {
            let d = k.checked_sub(self.exp(v))?;
            if d > 0 {
                exps.insert(v.clone(), d);
            }
        }
        // a variable of self absent from other means no divisibility
        if self.exps.keys().any(|v| !other.exps.contains_key(v)) {
            return None;
        }
        Some(Monomial { exps })
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps.clone();
        for (v, &k) in &other.exps {
            let e = exps.entry(v.clone()).or_insert(0);
            *e = (*e).max(k);
        }
        Monomial { exps }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Monomial {
        Monomial::from_exps(
            self.exps
                .iter()
                .map(|(v, &k)| (map.get(v).cloned().unwrap_or_else(|| v.clone()), k)),
        )
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .map(|(v, &k)| if k == 1 { v.clone() } else { format!("{v}^{k}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// A block monomial order. `cmp` returns `Greater` when `a` is the larger
/// monomial, i.e. the one that would be the leading term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    blocks: Vec<Vec<String>>,
}

impl MonomialOrder {
    /// Plain graded reverse lexicographic order on one block of variables.
    pub fn grevlex(vars: &[String]) -> Self {
        MonomialOrder { blocks: vec![vars.to_vec()] }
    }

    /// Two-block order: `main` dominates, `params` breaks ties. Used when
    /// dividing with extra variables treated as coefficients.
    pub fn block(main: &[String], params: &[String]) -> Self {
        MonomialOrder { blocks: vec![main.to_vec(), params.to_vec()] }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().flatten().map(|v| v.as_str())
    }

    fn cmp_block(block: &[String], a: &Monomial, b: &Monomial) -> Ordering {
        let da: u32 = block.iter().map(|v| a.exp(v)).sum();
        let db: u32 = block.iter().map(|v| b.exp(v)).sum();
        match da.cmp(&db) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // reverse lex tiebreak: the rightmost variable where the exponents
        // differ decides, and the smaller exponent there wins
        for v in block.iter().rev() {
            match a.exp(v).cmp(&b.exp(v)) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {}
            }
        }
        Ordering::Equal
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        for block in &self.blocks {
            match Self::cmp_block(block, a, b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    pub fn max<'a>(&self, a: &'a Monomial, b: &'a Monomial) -> &'a Monomial {
        if self.cmp(a, b) == Ordering::Less {
            b
        } else {
            a
        }
    }
}

/// All exponent vectors over `n` slots of total degree exactly `degree`, in
/// lexicographically ascending order.
pub fn multi_indices_of_degree(n: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(slot: usize, remaining: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == current.len() {
            current[slot] = remaining;
            out.push(current.clone());
            return;
        }
        for k in 0..=remaining {
            current[slot] = k;
            rec(slot + 1, remaining - k, current, out);
        }
    }
    if n == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, degree, &mut current, &mut out);
    out
}

/// All exponent vectors of total degree at most `degree`, grouped by degree
/// ascending and lexicographically ascending inside each degree.
pub fn multi_indices_up_to(n: usize, degree: u32) -> Vec<Vec<u32>> {
    (0..=degree).flat_map(|d| multi_indices_of_degree(n, d)).collect()
}

/// Builds the monomial with the given exponent vector over the given
/// variables.
pub fn monomial_from_index(vars: &[String], sigma: &[u32]) -> Monomial {
    Monomial::from_exps(vars.iter().cloned().zip(sigma.iter().copied()))
}
