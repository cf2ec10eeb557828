use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::seed;

/// Largest group order `construct_group` builds unless told otherwise.
pub const DEFAULT_GROUP_CAP: usize = 4096;

const ASSOC_EXHAUSTIVE_MAX: usize = 64;
const ASSOC_SAMPLES: usize = 20_000;

/// A group recipe, parsed from strings such as `cyclic:6`, `z2^4`,
/// `dihedral:15` or `product:cyclic:2*dihedral:3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(usize),
    Dihedral(usize),
    Product(Vec<GroupSpec>),
}

impl GroupSpec {
    pub fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::Cyclic(n) => Some(*n),
            GroupSpec::Dihedral(n) => n.checked_mul(2),
            GroupSpec::Product(parts) => parts
                .iter()
                .try_fold(1usize, |acc, p| acc.checked_mul(p.order()?)),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let positive = |t: &str| -> Result<usize> {
            let v: usize = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad group size {t:?} in {s:?}")))?;
            ensure!(
                v >= 1,
                Domain,
                "group parameters must be at least 1 in {s:?}"
            );
            Ok(v)
        };
        if let Some(rest) = s.strip_prefix("cyclic:") {
            return Ok(GroupSpec::Cyclic(positive(rest)?));
        }
        if let Some(rest) = s.strip_prefix("dihedral:") {
            return Ok(GroupSpec::Dihedral(positive(rest)?));
        }
        if let Some(rest) = s.strip_prefix("product:") {
            let parts = rest
                .split('*')
                .map(str::parse)
                .collect::<Result<Vec<GroupSpec>>>()?;
            return Ok(GroupSpec::Product(parts));
        }
        if let Some(rest) = s.strip_prefix('z') {
            return match rest.split_once('^') {
                Some((m, k)) => Ok(GroupSpec::Product(vec![
                    GroupSpec::Cyclic(positive(m)?);
                    positive(k)?
                ])),
                None => Ok(GroupSpec::Cyclic(positive(rest)?)),
            };
        }
        Err(Error::Parse(format!("unknown group spec {s:?}")))
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupSpec::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupSpec::Product(parts) => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "product:{}", parts.join("*"))
            }
        }
    }
}

/// A finite group as an explicit multiplication table. Index 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    labels: Vec<String>,
}

impl GroupTable {
    /// Builds a table from raw parts and checks every group axiom.
    pub fn from_parts(mul: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        let order = labels.len();
        ensure!(order >= 1, Validation, "empty group");
        ensure!(
            mul.len() == order * order,
            Validation,
            "multiplication table has {} entries, expected {}",
            mul.len(),
            order * order
        );
        let mut inv = vec![usize::MAX; order];
        for a in 0..order {
            for b in 0..order {
                if mul[a * order + b] == 0 {
                    inv[a] = b;
                    break;
                }
            }
        }
        let g = GroupTable {
            order,
            mul,
            inv,
            labels,
        };
        g.verify()?;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn pow(&self, a: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn commute(&self, a: usize, b: usize) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a + 1..self.order).all(|b| self.commute(a, b)))
    }

    /// Checks closure, identity, inverses and associativity. Associativity is
    /// exhaustive up to order 64 and sampled on random triples above that.
    pub fn verify(&self) -> Result<()> {
        let n = self.order;
        ensure!(
            self.mul.iter().all(|&x| x < n),
            Validation,
            "table entry out of range"
        );
        for a in 0..n {
            ensure!(
                self.mul(0, a) == a && self.mul(a, 0) == a,
                Validation,
                "index 0 is not the identity"
            );
            let b = self.inv[a];
            ensure!(
                b < n && self.mul(a, b) == 0 && self.mul(b, a) == 0,
                Validation,
                "element {a} has no two-sided inverse"
            );
            let mut row = vec![false; n];
            for x in 0..n {
                row[self.mul(a, x)] = true;
            }
            ensure!(
                row.iter().all(|&s| s),
                Validation,
                "row {a} is not a permutation"
            );
        }
        let assoc = |a: usize, b: usize, c: usize| {
            self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))
        };
        if n <= ASSOC_EXHAUSTIVE_MAX {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        ensure!(
                            assoc(a, b, c),
                            Validation,
                            "not associative at ({a},{b},{c})"
                        );
                    }
                }
            }
        } else {
            let mut rng = seed::rng(n as u64, 0xa550c, 0);
            for _ in 0..ASSOC_SAMPLES {
                let (a, b, c) = (
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                );
                ensure!(
                    assoc(a, b, c),
                    Validation,
                    "not associative at ({a},{b},{c})"
                );
            }
        }
        Ok(())
    }
}

fn cyclic(n: usize) -> (Vec<usize>, Vec<String>) {
    let mul = (0..n * n).map(|i| (i / n + i % n) % n).collect();
    (mul, (0..n).map(|a| a.to_string()).collect())
}

/// Element `a < n` is `r^a`, element `n + a` is `t r^a`.
fn dihedral(n: usize) -> (Vec<usize>, Vec<String>) {
    let order = 2 * n;
    let mut mul = vec![0; order * order];
    for x in 0..order {
        let (e1, a) = (x / n, x % n);
        for y in 0..order {
            let (e2, b) = (y / n, y % n);
            // r^a t = t r^-a
            let rot = if e2 == 0 {
                (a + b) % n
            } else {
                (n - a + b) % n
            };
            mul[x * order + y] = ((e1 + e2) % 2) * n + rot;
        }
    }
    let labels = (0..order)
        .map(|x| {
            if x < n {
                format!("r^{x}")
            } else {
                format!("tr^{}", x - n)
            }
        })
        .collect();
    (mul, labels)
}

/// Direct product with the last factor varying fastest.
fn product(parts: &[(Vec<usize>, Vec<String>)]) -> (Vec<usize>, Vec<String>) {
    let mut acc: (Vec<usize>, Vec<String>) = (vec![0], vec![String::new()]);
    for (mul_b, lab_b) in parts {
        let (mul_a, lab_a) = &acc;
        let (na, nb) = (lab_a.len(), lab_b.len());
        let order = na * nb;
        let mut mul = vec![0; order * order];
        for x in 0..order {
            for y in 0..order {
                let a = mul_a[(x / nb) * na + y / nb];
                let b = mul_b[(x % nb) * nb + y % nb];
                mul[x * order + y] = a * nb + b;
            }
        }
        let labels = (0..order)
            .map(|x| {
                let head = &lab_a[x / nb];
                if head.is_empty() {
                    lab_b[x % nb].clone()
                } else {
                    format!("{head},{}", lab_b[x % nb])
                }
            })
            .collect();
        acc = (mul, labels);
    }
    acc
}

fn build(spec: &GroupSpec) -> (Vec<usize>, Vec<String>) {
    match spec {
        GroupSpec::Cyclic(n) => cyclic(*n),
        GroupSpec::Dihedral(n) => dihedral(*n),
        GroupSpec::Product(parts) => {
            let built: Vec<_> = parts.iter().map(build).collect();
            let (mul, labels) = product(&built);
            let labels = labels.into_iter().map(|l| format!("({l})")).collect();
            (mul, labels)
        }
    }
}

pub fn construct_group(spec: &GroupSpec) -> Result<GroupTable> {
    construct_group_capped(spec, DEFAULT_GROUP_CAP)
}

pub fn construct_group_capped(spec: &GroupSpec, cap: usize) -> Result<GroupTable> {
    let order = spec
        .order()
        .ok_or_else(|| Error::Resource(format!("order of {spec} overflows")))?;
    ensure!(
        order <= cap,
        Resource,
        "{spec} has order {order}, above the cap of {cap}"
    );
    ensure!(order >= 1, Domain, "{spec} is empty");
    let (mul, labels) = build(spec);
    GroupTable::from_parts(mul, labels)
}

/// A subgroup, stored as the sorted list of its element indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    elements: Vec<usize>,
}

impl Subgroup {
    /// Closure of `gens` and the identity under multiplication.
    pub fn generate(g: &GroupTable, gens: &[usize]) -> Result<Self> {
        for &x in gens {
            ensure!(x < g.order(), Domain, "generator {x} is not an element");
        }
        let mut member = vec![false; g.order()];
        member[0] = true;
        let mut elements = vec![0];
        let mut i = 0;
        while i < elements.len() {
            let x = elements[i];
            for &s in gens {
                let y = g.mul(x, s);
                if !member[y] {
                    member[y] = true;
                    elements.push(y);
                }
            }
            i += 1;
        }
        elements.sort_unstable();
        Ok(Subgroup { elements })
    }

    /// Wraps an explicit element set after checking the subgroup axioms.
    pub fn from_elements(g: &GroupTable, mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        ensure!(
            elements.iter().all(|&x| x < g.order()),
            Validation,
            "subgroup element out of range"
        );
        let h = Subgroup { elements };
        ensure!(h.contains(0), Validation, "subgroup lacks the identity");
        for &a in &h.elements {
            ensure!(
                h.contains(g.inv(a)),
                Validation,
                "not closed under inverses"
            );
            for &b in &h.elements {
                ensure!(
                    h.contains(g.mul(a, b)),
                    Validation,
                    "not closed under products"
                );
            }
        }
        ensure!(
            g.order() % h.order() == 0,
            Validation,
            "subgroup order does not divide group order"
        );
        Ok(h)
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Position of `x` within `elements()`.
    pub fn position(&self, x: usize) -> Option<usize> {
        self.elements.binary_search(&x).ok()
    }

    pub fn intersection_order(&self, other: &Subgroup) -> usize {
        self.elements.iter().filter(|&&x| other.contains(x)).count()
    }

    pub fn is_abelian(&self, g: &GroupTable) -> bool {
        self.elements
            .iter()
            .all(|&a| self.elements.iter().all(|&b| g.commute(a, b)))
    }

    /// Lexicographically smallest element index of every left coset `xH`.
    pub fn coset_representatives(&self, g: &GroupTable) -> Vec<usize> {
        let mut covered = vec![false; g.order()];
        let mut reps = Vec::with_capacity(g.order() / self.order());
        for x in 0..g.order() {
            if !covered[x] {
                reps.push(x);
                for &h in &self.elements {
                    covered[g.mul(x, h)] = true;
                }
            }
        }
        reps
    }

    pub fn describe(&self, g: &GroupTable) -> String {
        let labels: Vec<&str> = self.elements.iter().map(|&x| g.label(x)).collect();
        format!("{{{}}}", labels.join(" "))
    }
}

/// Every subgroup of `g`, ordered by size and then by element list.
///
/// Starts from the cyclic subgroups and adds joins until nothing new appears.
pub fn all_subgroups(g: &GroupTable) -> Result<Vec<Subgroup>> {
    use std::collections::BTreeSet;
    let mut found: BTreeSet<Subgroup> = BTreeSet::new();
    for x in 0..g.order() {
        found.insert(Subgroup::generate(g, &[x])?);
    }
    let cyclic: Vec<Subgroup> = found.iter().cloned().collect();
    loop {
        let current: Vec<Subgroup> = found.iter().cloned().collect();
        let mut grew = false;
        for h in &current {
            for c in &cyclic {
                if c.elements.iter().all(|&x| h.contains(x)) {
                    continue;
                }
                let mut gens = h.elements.clone();
                gens.extend_from_slice(&c.elements);
                if found.insert(Subgroup::generate(g, &gens)?) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut out: Vec<Subgroup> = found.into_iter().collect();
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// The register subspace `span{e_i : i ∈ coords}` of `Z_2^n`, where `g` was
/// built as `z2^n` (coordinate 0 is the most significant bit of the index).
pub fn register_subspace(g: &GroupTable, n: usize, coords: &[usize]) -> Result<Subgroup> {
    ensure!(
        n < usize::BITS as usize && g.order() == 1 << n,
        Domain,
        "group of order {} is not Z_2^{n}",
        g.order()
    );
    for &i in coords {
        ensure!(i < n, Domain, "coordinate {i} out of range for n = {n}");
    }
    let gens: Vec<usize> = coords.iter().map(|&i| 1 << (n - 1 - i)).collect();
    Subgroup::generate(g, &gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(s: &str) -> GroupTable {
        construct_group(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            "cyclic:6".parse::<GroupSpec>().unwrap(),
            GroupSpec::Cyclic(6)
        );
        assert_eq!("z5".parse::<GroupSpec>().unwrap(), GroupSpec::Cyclic(5));
        assert_eq!(
            "z2^3".parse::<GroupSpec>().unwrap(),
            GroupSpec::Product(vec![GroupSpec::Cyclic(2); 3])
        );
        let p: GroupSpec = "product:cyclic:2*dihedral:3".parse().unwrap();
        assert_eq!(p.order(), Some(12));
        assert_eq!(p.to_string().parse::<GroupSpec>().unwrap(), p);
        assert!("cyclic:0".parse::<GroupSpec>().is_err());
        assert!("klein".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn small_groups() {
        let triv = group("cyclic:1");
        assert_eq!(triv.order(), 1);

        let z = group("z2^4");
        assert_eq!(z.order(), 16);
        assert!((0..16).all(|a| z.inv(a) == a));
        assert!(z.is_abelian());
        assert_eq!(z.label(5), "(0,1,0,1)");

        let c6 = group("cyclic:6");
        assert_eq!(c6.element_order(2), 3);
        assert_eq!(c6.inv(2), 4);
    }

    #[test]
    fn dihedral_presentation() {
        let n = 15;
        let d = group("dihedral:15");
        assert_eq!(d.order(), 30);
        assert!(!d.is_abelian());
        let (r, t) = (1, n);
        assert_eq!(d.pow(r, n), 0);
        assert_eq!(d.mul(t, t), 0);
        assert_eq!(d.pow(d.mul(t, r), 2), 0);
        assert_eq!(d.mul(d.mul(r, t), r), t);
        assert_eq!(d.label(17), "tr^2");
    }

    #[test]
    fn cap_is_enforced() {
        let spec: GroupSpec = "z2^13".parse().unwrap();
        assert!(matches!(construct_group(&spec), Err(Error::Resource(_))));
        assert!(construct_group_capped(&"cyclic:100".parse().unwrap(), 50).is_err());
    }

    #[test]
    fn large_group_uses_sampled_associativity() {
        let g = group("product:dihedral:10*cyclic:4");
        assert_eq!(g.order(), 80);
    }

    #[test]
    fn broken_table_is_rejected() {
        // Z_3 with one entry corrupted
        let mut mul = cyclic(3).0;
        mul[4] = 1;
        assert!(GroupTable::from_parts(mul, vec!["0".into(), "1".into(), "2".into()]).is_err());
    }

    #[test]
    fn subgroup_generation() {
        let d = group("dihedral:15");
        let trivial = Subgroup::generate(&d, &[0]).unwrap();
        assert_eq!(trivial.order(), 1);

        let d3 = Subgroup::generate(&d, &[5, 15]).unwrap();
        assert_eq!(d3.order(), 6);
        assert!(!d3.is_abelian(&d));
        assert_eq!(d3.coset_representatives(&d), vec![0, 1, 2, 3, 4]);

        let z = group("z2^4");
        let reg = register_subspace(&z, 4, &[0, 1]).unwrap();
        assert_eq!(reg.elements(), &[0, 4, 8, 12]);
        assert!(Subgroup::from_elements(&z, vec![0, 4, 8]).is_err());
        assert!(Subgroup::from_elements(&z, vec![0, 4, 8, 12]).is_ok());
    }

    #[test]
    fn subgroup_lattices() {
        // D_15: 15 reflections, D_3 x5, D_5 x3, the rotation subgroups of order
        // 1, 3, 5, 15, and D_15 itself
        assert_eq!(all_subgroups(&group("dihedral:15")).unwrap().len(), 28);
        // subspaces of F_2^4: 1 + 15 + 35 + 15 + 1
        assert_eq!(all_subgroups(&group("z2^4")).unwrap().len(), 67);
        assert_eq!(all_subgroups(&group("cyclic:12")).unwrap().len(), 6);
    }
}
