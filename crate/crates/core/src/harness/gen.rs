//! Seeded instance generators for the two benchmark families.
//!
//! Both emit fully ground programs: arithmetic and comparisons are
//! tabulated up front, so the grounder has nothing to expand.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::correction::{Removable, SpecFile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("a simple graph on {v} vertices has at most {max} edges, {e} requested")]
    TooManyEdges { v: usize, e: usize, max: usize },
    #[error("pattern length {p} exceeds text length {t}")]
    PatternTooLong { p: usize, t: usize },
    #[error("{0}")]
    Invalid(String),
}

/// A generated program together with its correction spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// File stem, e.g. `graceful_v6_e10-007`.
    pub name: String,
    pub program: String,
    pub spec: SpecFile,
}

impl Instance {
    /// Everything before the last `-` of the name.
    pub fn family(&self) -> &str {
        family_of(&self.name)
    }

    /// Writes `<name>.lp` and `<name>.spec.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let lp = dir.join(format!("{}.lp", self.name));
        let spec = dir.join(format!("{}.spec.json", self.name));
        fs::write(&lp, &self.program)?;
        fs::write(&spec, self.spec.to_json() + "\n")?;
        Ok((lp, spec))
    }
}

pub fn family_of(name: &str) -> &str {
    name.rsplit_once('-').map_or(name, |(f, _)| f)
}

/// A random simple graph with `v` vertices and `e` edges, as the problem
/// of labelling it gracefully. Edge facts are removable.
pub fn graceful(v: usize, e: usize, seed: u64) -> Result<Instance, GenError> {
    let max = v * v.saturating_sub(1) / 2;
    if e > max {
        return Err(GenError::TooManyEdges { v, e, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all = (1..=v).flat_map(|a| (a + 1..=v).map(move |b| (a, b)));
    let mut edges = all.choose_multiple(&mut rng, e);
    edges.sort_unstable();
    let mut inst = graceful_for(v, &edges)?;
    inst.name = format!("graceful_v{v}_e{e}-{seed:03}");
    Ok(inst)
}

/// Graceful labelling of a given graph: vertices get distinct labels in
/// `0..=|E|` so that the edge labels `|l(u) - l(v)|` are distinct.
pub fn graceful_for(v: usize, edges: &[(usize, usize)]) -> Result<Instance, GenError> {
    let e = edges.len();
    let distinct: BTreeSet<_> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if distinct.len() != e || edges.iter().any(|&(a, b)| a == b || a == 0 || b == 0 || a > v || b > v) {
        return Err(GenError::Invalid("edges must be distinct pairs of distinct vertices in 1..=v".into()));
    }
    let mut out = String::new();
    let _ = writeln!(out, "% graceful labelling: {v} vertices, {e} edges");
    for &(a, b) in edges {
        let _ = writeln!(out, "edge({a},{b}).");
    }
    for a in 0..=e {
        for b in 0..=e {
            if a != b {
                let _ = writeln!(out, "diff({a},{b},{}).", a.abs_diff(b));
            }
        }
    }
    for x in 1..=v {
        let labels: Vec<String> = (0..=e).map(|l| format!("lab({x},{l})")).collect();
        let _ = writeln!(out, "1 {{ {} }}.", labels.join("; "));
        for a in 0..=e {
            for b in a + 1..=e {
                let _ = writeln!(out, ":- lab({x},{a}), lab({x},{b}).");
            }
        }
    }
    for x in 1..=v {
        for y in x + 1..=v {
            for l in 0..=e {
                let _ = writeln!(out, ":- lab({x},{l}), lab({y},{l}).");
            }
        }
    }
    for &(x, y) in edges {
        for a in 0..=e {
            for b in 0..=e {
                if a != b {
                    let d = a.abs_diff(b);
                    let _ = writeln!(out, "elab({x},{y},{d}) :- edge({x},{y}), lab({x},{a}), lab({y},{b}), diff({a},{b},{d}).");
                }
            }
        }
    }
    for (i, &(x1, y1)) in edges.iter().enumerate() {
        for &(x2, y2) in &edges[i + 1..] {
            for d in 1..=e {
                let _ = writeln!(out, ":- elab({x1},{y1},{d}), elab({x2},{y2},{d}).");
            }
        }
    }
    Ok(Instance {
        name: format!("graceful_v{v}_e{e}"),
        program: out,
        spec: SpecFile { removable: vec![Removable::Predicate("edge/2".into())], ..Default::default() },
    })
}

/// A random permutation `T` of `1..=t_len` and pattern `P` of `1..=p_len`,
/// as the problem of finding `P` order-isomorphically in `T`.
pub fn patterns(t_len: usize, p_len: usize, seed: u64) -> Result<Instance, GenError> {
    if p_len > t_len {
        return Err(GenError::PatternTooLong { p: p_len, t: t_len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text: Vec<usize> = (1..=t_len).collect();
    text.shuffle(&mut rng);
    let mut pattern: Vec<usize> = (1..=p_len).collect();
    pattern.shuffle(&mut rng);
    let mut inst = patterns_for(&text, &pattern)?;
    inst.name = format!("patterns_t{t_len}_p{p_len}-{seed:03}");
    Ok(inst)
}

/// Pattern matching for given sequences of distinct values.
///
/// Pattern elements are the facts `pat(i,v)` (position `i`, value `v`);
/// they are removable, and any `pat(i,v)` over the `slot/2` grid may be
/// added. A corrected pattern keeps at most one value per position and
/// distinct values, may leave at most one position empty, and must occur
/// in the text: present positions map to strictly increasing text
/// positions whose values are ordered as in the pattern.
pub fn patterns_for(text: &[usize], pattern: &[usize]) -> Result<Instance, GenError> {
    let (n, m) = (text.len(), pattern.len());
    if m > n {
        return Err(GenError::PatternTooLong { p: m, t: n });
    }
    if text.iter().collect::<BTreeSet<_>>().len() != n || pattern.iter().collect::<BTreeSet<_>>().len() != m {
        return Err(GenError::Invalid("sequence values must be distinct".into()));
    }
    let values = m.max(pattern.iter().copied().max().unwrap_or(0));
    let mut out = String::new();
    let _ = writeln!(out, "% pattern {pattern:?} in text {text:?}");
    for (j, w) in text.iter().enumerate() {
        let _ = writeln!(out, "t({},{w}).", j + 1);
    }
    for i in 1..=m {
        for v in 1..=values {
            let _ = writeln!(out, "slot({i},{v}).");
        }
    }
    for (i, v) in pattern.iter().enumerate() {
        let _ = writeln!(out, "pat({},{v}).", i + 1);
    }
    for i in 1..=m {
        let at: Vec<String> = (1..=n).map(|j| format!("at({i},{j})")).collect();
        let _ = writeln!(out, "0 {{ {} }}.", at.join("; "));
        for j in 1..=n {
            let _ = writeln!(out, "matched({i}) :- at({i},{j}).");
        }
        for v in 1..=values {
            let _ = writeln!(out, "present({i}) :- pat({i},{v}).");
        }
        let _ = writeln!(out, ":- present({i}), not matched({i}).");
        for j in 1..=n {
            let _ = writeln!(out, ":- at({i},{j}), not present({i}).");
            for k in j + 1..=n {
                let _ = writeln!(out, ":- at({i},{j}), at({i},{k}).");
            }
        }
        for v in 1..=values {
            for w in v + 1..=values {
                let _ = writeln!(out, ":- pat({i},{v}), pat({i},{w}).");
            }
        }
    }
    for i in 1..=m {
        for k in i + 1..=m {
            for v in 1..=values {
                let _ = writeln!(out, ":- pat({i},{v}), pat({k},{v}).");
            }
            let _ = writeln!(out, ":- not present({i}), not present({k}).");
            for j in 1..=n {
                for l in 1..=j {
                    let _ = writeln!(out, ":- at({i},{j}), at({k},{l}).");
                }
            }
        }
    }
    for i in 1..=m {
        for k in 1..=m {
            if i == k {
                continue;
            }
            for v in 1..=values {
                for w in v + 1..=values {
                    let _ = writeln!(out, "plt({i},{k}) :- pat({i},{v}), pat({k},{w}).");
                }
            }
            for (j, &x) in text.iter().enumerate() {
                for (l, &y) in text.iter().enumerate() {
                    if x < y {
                        let _ = writeln!(out, "tlt({i},{k}) :- at({i},{}), at({k},{}), t({},{x}), t({},{y}).", j + 1, l + 1, j + 1, l + 1);
                    }
                }
            }
            let _ = writeln!(out, ":- plt({i},{k}), not tlt({i},{k}).");
        }
    }
    Ok(Instance {
        name: format!("patterns_t{n}_p{m}"),
        program: out,
        spec: SpecFile {
            removable: vec![Removable::Predicate("pat/2".into())],
            addition_exprs: vec!["pat(I,V):slot(I,V)".into()],
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::min_correct;
    use crate::ground::{check_safety, ground};
    use crate::maxcon::Algorithm;
    use crate::parse::parse_program;
    use crate::program::render;
    use crate::solver::{solve, SolverConfig};

    /// Tries every injective labelling `1..=v -> 0..=|E|`.
    fn is_graceful(v: usize, edges: &[(usize, usize)]) -> bool {
        fn go(labels: &mut Vec<usize>, v: usize, top: usize, edges: &[(usize, usize)]) -> bool {
            if labels.len() == v {
                let mut seen = BTreeSet::new();
                return edges.iter().all(|&(a, b)| seen.insert(labels[a - 1].abs_diff(labels[b - 1])));
            }
            for l in 0..=top {
                if !labels.contains(&l) {
                    labels.push(l);
                    if go(labels, v, top, edges) {
                        return true;
                    }
                    labels.pop();
                }
            }
            false
        }
        go(&mut Vec::new(), v, edges.len(), edges)
    }

    /// Whether `pattern` occurs order-isomorphically in `text`.
    fn occurs(text: &[usize], pattern: &[usize]) -> bool {
        let n = text.len();
        (0u32..1 << n).filter(|m| m.count_ones() as usize == pattern.len()).any(|m| {
            let sub: Vec<usize> = (0..n).filter(|j| m >> j & 1 == 1).map(|j| text[j]).collect();
            (0..sub.len()).all(|i| (0..sub.len()).all(|k| (sub[i] < sub[k]) == (pattern[i] < pattern[k])))
        })
    }

    fn consistent(inst: &Instance) -> bool {
        let g = ground(&parse_program(&inst.program).unwrap()).unwrap();
        solve(&g.program, &SolverConfig::default()).unwrap().consistent()
    }

    #[test]
    fn family_names() {
        assert_eq!(family_of("graceful_v6_e10-007"), "graceful_v6_e10");
        assert_eq!(family_of("plain"), "plain");
        assert_eq!(graceful(4, 3, 7).unwrap().name, "graceful_v4_e3-007");
        assert_eq!(patterns(8, 5, 12).unwrap().family(), "patterns_t8_p5");
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(graceful(6, 10, 3).unwrap(), graceful(6, 10, 3).unwrap());
        assert_ne!(graceful(6, 10, 3).unwrap().program, graceful(6, 10, 4).unwrap().program);
        assert_eq!(patterns(8, 5, 3).unwrap(), patterns(8, 5, 3).unwrap());
    }

    #[test]
    fn generator_preconditions() {
        assert_eq!(graceful(3, 4, 0).unwrap_err(), GenError::TooManyEdges { v: 3, e: 4, max: 3 });
        assert_eq!(patterns(3, 4, 0).unwrap_err(), GenError::PatternTooLong { p: 4, t: 3 });
        assert!(graceful_for(3, &[(1, 1)]).is_err());
        assert!(patterns_for(&[1, 1], &[1]).is_err());
    }

    #[test]
    fn generated_programs_round_trip_and_are_safe() {
        for inst in [graceful(6, 10, 1).unwrap(), patterns(8, 5, 1).unwrap()] {
            let p = parse_program(&inst.program).unwrap();
            assert!(check_safety(&p).is_empty());
            assert!(p.is_ground());
            assert!(parse_program(&render(&p)).unwrap().structurally_eq(&p));
        }
    }

    #[test]
    fn small_graphs() {
        let single = graceful_for(2, &[(1, 2)]).unwrap();
        assert!(consistent(&single));
        let triangle = [(1, 2), (1, 3), (2, 3)];
        assert!(is_graceful(3, &triangle));
        assert!(consistent(&graceful_for(3, &triangle).unwrap()));
        for seed in 0..12 {
            let v = 4 + seed as usize % 2;
            let e = [3, 4, 5, 6][seed as usize % 4];
            let inst = graceful(v, e, seed).unwrap();
            let g = ground(&parse_program(&inst.program).unwrap()).unwrap();
            let edges: Vec<(usize, usize)> = g
                .program
                .rules()
                .iter()
                .filter_map(|r| r.head_atom().filter(|a| &*a.predicate == "edge"))
                .map(|a| {
                    let n: Vec<usize> = a.args.iter().map(|t| t.to_string().parse().unwrap()).collect();
                    (n[0], n[1])
                })
                .collect();
            assert_eq!(edges.len(), e);
            assert_eq!(consistent(&inst), is_graceful(v, &edges), "{}", inst.name);
        }
    }

    #[test]
    fn non_graceful_graph_loses_an_edge() {
        // The 5-cycle is not graceful; dropping any edge leaves a path.
        let edges = [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)];
        assert!(!is_graceful(5, &edges));
        let inst = graceful_for(5, &edges).unwrap();
        assert!(!consistent(&inst));
        let g = ground(&parse_program(&inst.program).unwrap()).unwrap();
        let spec = inst.spec.resolve(&g).unwrap();
        let r = min_correct(&g.program, &spec, Algorithm::MaxCard, &SolverConfig::default()).unwrap();
        assert_eq!(r.correction.removed.len(), 1);
        assert!(r.correction.added.is_empty());
    }

    #[test]
    fn small_patterns() {
        assert!(consistent(&patterns_for(&[1, 2, 3], &[1, 2]).unwrap()));
        assert!(!consistent(&patterns_for(&[3, 2, 1], &[1, 2]).unwrap()));
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut text: Vec<usize> = (1..=6).collect();
            text.shuffle(&mut rng);
            let mut pattern: Vec<usize> = (1..=4).collect();
            pattern.shuffle(&mut rng);
            let inst = patterns_for(&text, &pattern).unwrap();
            assert_eq!(consistent(&inst), occurs(&text, &pattern), "{text:?} {pattern:?}");
        }
    }

    #[test]
    fn reversed_pattern_loses_one_element() {
        let inst = patterns_for(&[3, 2, 1], &[1, 2]).unwrap();
        let g = ground(&parse_program(&inst.program).unwrap()).unwrap();
        let spec = inst.spec.resolve(&g).unwrap();
        assert_eq!(spec.removable.len(), 2);
        for algo in Algorithm::ALL {
            let r = min_correct(&g.program, &spec, algo, &SolverConfig::default()).unwrap();
            assert_eq!(r.correction.removed.len(), 1, "{algo}");
            assert!(r.correction.added.is_empty(), "{algo}");
            // Either single element occurs on its own.
            assert!(occurs(&[3, 2, 1], &[1]));
        }
    }

    #[test]
    fn instances_are_written_in_pairs() {
        let dir = tempfile::tempdir().unwrap();
        let inst = patterns(8, 5, 2).unwrap();
        let (lp, spec) = inst.write_to(dir.path()).unwrap();
        assert_eq!(lp.file_name().unwrap(), "patterns_t8_p5-002.lp");
        assert_eq!(spec.file_name().unwrap(), "patterns_t8_p5-002.spec.json");
        assert_eq!(fs::read_to_string(lp).unwrap(), inst.program);
        assert_eq!(SpecFile::from_json(&fs::read_to_string(spec).unwrap()).unwrap(), inst.spec);
    }
}
