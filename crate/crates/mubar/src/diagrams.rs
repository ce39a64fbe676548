//! Link and string-link diagrams, closures, linking numbers and a skein oracle.
//!
//! Diagrams are stored as signed Gauss codes: each component is the list of
//! crossing visits `(crossing, over?)` in traversal order, and crossing signs are
//! the usual oriented signs (right-handed = +1).

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};
use thiserror::Error;

use crate::factor::{gamma, FactorError, GammaResult};
use crate::milnor::{mu_table, LinkingData, MilnorError};
use crate::series::{ConwayPoly, ZSeries};
use crate::words::{nilpotent_longitudes, Braid, Relation, StrandArcs, Word, WordError, WirtingerPresentation};

pub const DEFAULT_MAX_CROSSINGS: usize = 18;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("strand {0} is oriented against the convention (odd strands run 0 to 1, even strands 1 to 0)")]
    Orientation(usize),
    #[error("diagram has {0} crossings, above the skein cap of {1}")]
    TooManyCrossings(usize, usize),
    #[error("string link has no diagram")]
    NoDiagram,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Milnor(#[from] MilnorError),
    #[error(transparent)]
    Factor(#[from] FactorError),
}

pub type Visit = (usize, bool);

/// A closed oriented link diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDiagram {
    components: Vec<Vec<Visit>>,
    signs: Vec<i8>,
}

fn check_gauss(components: &[Vec<Visit>], n: usize) -> Result<(), DiagramError> {
    let mut seen = vec![(0u8, 0u8); n];
    for comp in components {
        for &(c, ov) in comp {
            if c >= n {
                return Err(DiagramError::Malformed(format!("crossing {c} has no sign")));
            }
            if ov {
                seen[c].0 += 1;
            } else {
                seen[c].1 += 1;
            }
        }
    }
    if let Some(c) = seen.iter().position(|&s| s != (1, 1)) {
        return Err(DiagramError::Malformed(format!("crossing {c} is not visited once over and once under")));
    }
    Ok(())
}

fn parse_sign(v: &Value) -> Result<i8, DiagramError> {
    match v {
        Value::String(s) if s == "+" => Ok(1),
        Value::String(s) if s == "-" => Ok(-1),
        Value::Number(n) if n.as_i64() == Some(1) => Ok(1),
        Value::Number(n) if n.as_i64() == Some(-1) => Ok(-1),
        _ => Err(DiagramError::Malformed(format!("bad crossing sign {v}"))),
    }
}

/// A PD crossing `[i, j, k, l, sign]`, counterclockwise from the incoming under arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PdCrossing {
    pub arcs: [i64; 4],
    pub sign: i8,
}

impl PdCrossing {
    /// `(under in, under out, over in, over out)`.
    fn ends(&self) -> (i64, i64, i64, i64) {
        let [i, j, k, l] = self.arcs;
        if self.sign > 0 {
            (i, k, l, j)
        } else {
            (i, k, j, l)
        }
    }
}

pub fn parse_pd_crossings(v: &Value) -> Result<Vec<PdCrossing>, DiagramError> {
    let arr = v.as_array().ok_or_else(|| DiagramError::Malformed("crossings must be a list".into()))?;
    arr.iter()
        .map(|c| {
            let c = c.as_array().filter(|c| c.len() == 5).ok_or_else(|| DiagramError::Malformed(format!("bad crossing {c}")))?;
            let mut arcs = [0i64; 4];
            for (k, a) in arcs.iter_mut().enumerate() {
                *a = c[k].as_i64().ok_or_else(|| DiagramError::Malformed(format!("bad arc label {}", c[k])))?;
            }
            Ok(PdCrossing { arcs, sign: parse_sign(&c[4])? })
        })
        .collect()
}

/// Successor structure of a PD code: which visit each arc enters and what leaves each visit.
struct PdGraph {
    enters: BTreeMap<i64, Visit>,
    leaves: BTreeMap<Visit, i64>,
    labels: BTreeSet<i64>,
}

fn pd_graph(cr: &[PdCrossing]) -> Result<PdGraph, DiagramError> {
    let mut enters = BTreeMap::new();
    let mut leaves = BTreeMap::new();
    let mut out_labels = BTreeMap::new();
    let mut labels = BTreeSet::new();
    for (c, x) in cr.iter().enumerate() {
        let (ui, uo, oi, oo) = x.ends();
        for (lab, v) in [(ui, (c, false)), (oi, (c, true))] {
            if enters.insert(lab, v).is_some() {
                return Err(DiagramError::Malformed(format!("arc {lab} enters two crossings")));
            }
            labels.insert(lab);
        }
        for (lab, v) in [(uo, (c, false)), (oo, (c, true))] {
            if out_labels.insert(lab, v).is_some() {
                return Err(DiagramError::Malformed(format!("arc {lab} leaves two crossings")));
            }
            leaves.insert(v, lab);
            labels.insert(lab);
        }
    }
    Ok(PdGraph { enters, leaves, labels })
}

impl LinkDiagram {
    pub fn new(components: Vec<Vec<Visit>>, signs: Vec<i8>) -> Result<Self, DiagramError> {
        check_gauss(&components, signs.len())?;
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(DiagramError::Malformed("crossing signs must be ±1".into()));
        }
        Ok(LinkDiagram { components, signs })
    }

    pub fn unknot() -> Self {
        LinkDiagram { components: vec![vec![]], signs: vec![] }
    }

    pub fn components(&self) -> &[Vec<Visit>] {
        &self.components
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn crossings(&self) -> usize {
        self.signs.len()
    }

    /// From a PD code; components are ordered by their smallest arc label.
    pub fn from_pd(cr: &[PdCrossing], free_loops: usize) -> Result<Self, DiagramError> {
        let g = pd_graph(cr)?;
        for lab in &g.labels {
            if !g.enters.contains_key(lab) || !g.leaves.values().any(|l| l == lab) {
                return Err(DiagramError::Malformed(format!("arc {lab} does not appear exactly twice")));
            }
        }
        let mut used = BTreeSet::new();
        let mut components = Vec::new();
        for &start in &g.labels {
            if used.contains(&start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut lab = start;
            loop {
                used.insert(lab);
                let v = g.enters[&lab];
                comp.push(v);
                lab = g.leaves[&v];
                if lab == start {
                    break;
                }
            }
            components.push(comp);
        }
        components.extend(std::iter::repeat_with(Vec::new).take(free_loops));
        Self::new(components, cr.iter().map(|c| c.sign).collect())
    }

    pub fn from_pd_json(v: &Value) -> Result<Self, DiagramError> {
        let cr = parse_pd_crossings(v.get("crossings").ok_or_else(|| DiagramError::Malformed("missing crossings".into()))?)?;
        let free = v.get("free_loops").and_then(Value::as_u64).unwrap_or(0) as usize;
        let d = Self::from_pd(&cr, free)?;
        if let Some(k) = v.get("components").and_then(Value::as_u64) {
            if k as usize != d.components.len() {
                return Err(DiagramError::Malformed(format!(
                    "declared {k} components, found {}",
                    d.components.len()
                )));
            }
        }
        Ok(d)
    }

    /// PD code with arcs numbered from 1 along the components in order.
    pub fn to_pd(&self) -> (Vec<PdCrossing>, usize) {
        let mut enter = vec![[0i64; 2]; self.crossings()];
        let mut leave = vec![[0i64; 2]; self.crossings()];
        let mut base = 1i64;
        let mut free = 0;
        for comp in &self.components {
            let n = comp.len() as i64;
            if n == 0 {
                free += 1;
                continue;
            }
            for (p, &(c, ov)) in comp.iter().enumerate() {
                let p = p as i64;
                enter[c][ov as usize] = base + p;
                leave[c][ov as usize] = base + (p + 1) % n;
            }
            base += n;
        }
        let cr = (0..self.crossings())
            .map(|c| {
                let (ui, uo, oi, oo) = (enter[c][0], leave[c][0], enter[c][1], leave[c][1]);
                let arcs = if self.signs[c] > 0 { [ui, oo, uo, oi] } else { [ui, oi, uo, oo] };
                PdCrossing { arcs, sign: self.signs[c] }
            })
            .collect();
        (cr, free)
    }

    pub fn to_pd_json(&self) -> Value {
        let (cr, free) = self.to_pd();
        json!({
            "components": self.components.len(),
            "free_loops": free,
            "crossings": cr.iter().map(|c| {
                let [i, j, k, l] = c.arcs;
                json!([i, j, k, l, if c.sign > 0 { "+" } else { "-" }])
            }).collect::<Vec<_>>(),
        })
    }

    /// Standard closure of an arbitrary braid with every strand running upward.
    pub fn braid_closure(b: &Braid) -> Self {
        let m = b.strands();
        let (cr, seqs) = braid_crossings(b);
        let signs: Vec<i8> = cr.iter().map(|c| c.2).collect();
        let perm = b.permutation();
        // strands are named by starting position; strand perm[p] ends at p
        let mut end = vec![0; m];
        for (p, &s) in perm.iter().enumerate() {
            end[s] = p;
        }
        let mut done = vec![false; m];
        let mut components = Vec::new();
        for s0 in 0..m {
            if done[s0] {
                continue;
            }
            let mut comp = Vec::new();
            let mut s = s0;
            while !done[s] {
                done[s] = true;
                comp.extend(seqs[s].iter().copied());
                s = end[s];
            }
            components.push(comp);
        }
        LinkDiagram { components, signs }
    }
}

/// Crossings `(over, under, sign)` with all strands upward, plus per-strand
/// visits bottom to top. σ_k puts the strand at position k+1 over the one at k.
fn braid_crossings(b: &Braid) -> (Vec<(usize, usize, i8)>, Vec<Vec<Visit>>) {
    let m = b.strands();
    let mut pos: Vec<usize> = (0..m).collect();
    let mut cr = Vec::new();
    let mut seqs = vec![Vec::new(); m];
    for &l in b.word() {
        let k = l.unsigned_abs() as usize - 1;
        let (a, bb) = (pos[k], pos[k + 1]);
        let (over, under, s) = if l > 0 { (bb, a, -1) } else { (a, bb, 1) };
        let c = cr.len();
        cr.push((over, under, s));
        seqs[over].push((c, true));
        seqs[under].push((c, false));
        pos.swap(k, k + 1);
    }
    (cr, seqs)
}

pub fn conventional_upward(i: usize) -> bool {
    i % 2 == 0
}

/// A string-link diagram: per-strand visits in traversal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StringLinkDiagram {
    m: usize,
    strands: Vec<Vec<Visit>>,
    signs: Vec<i8>,
    upward: Vec<bool>,
}

impl StringLinkDiagram {
    pub fn new(strands: Vec<Vec<Visit>>, signs: Vec<i8>, upward: Vec<bool>) -> Result<Self, DiagramError> {
        let m = strands.len();
        if upward.len() != m {
            return Err(DiagramError::Malformed("one orientation flag per strand".into()));
        }
        check_gauss(&strands, signs.len())?;
        if let Some(i) = (0..m).find(|&i| upward[i] != conventional_upward(i)) {
            return Err(DiagramError::Orientation(i + 1));
        }
        Ok(StringLinkDiagram { m, strands, signs, upward })
    }

    /// Pure braid drawn bottom to top, even strands reversed.
    pub fn from_braid(b: &Braid) -> Result<Self, DiagramError> {
        Self::from_braid_oriented(b, &(0..b.strands()).map(conventional_upward).collect::<Vec<_>>())
    }

    /// As `from_braid` with explicit orientations; anything but the convention is rejected.
    pub fn from_braid_oriented(b: &Braid, upward: &[bool]) -> Result<Self, DiagramError> {
        if !b.is_pure() {
            return Err(WordError::NotPure.into());
        }
        let (cr, seqs) = braid_crossings(b);
        let orient = |i: usize| if upward[i] { 1 } else { -1 };
        let signs = cr.iter().map(|&(o, u, s)| s * orient(o) * orient(u)).collect();
        let strands = seqs
            .into_iter()
            .enumerate()
            .map(|(i, s)| if upward[i] { s } else { s.into_iter().rev().collect() })
            .collect();
        Self::new(strands, signs, upward.to_vec())
    }

    /// From a PD tangle; `endpoints[i] = [bottom, top]` arc labels of strand `i`.
    pub fn from_pd(cr: &[PdCrossing], endpoints: &[[i64; 2]]) -> Result<Self, DiagramError> {
        let g = pd_graph(cr)?;
        let mut used = BTreeSet::new();
        let mut strands = Vec::new();
        let mut upward = Vec::new();
        for (i, &[bot, top]) in endpoints.iter().enumerate() {
            if bot == top {
                if g.labels.contains(&bot) {
                    return Err(DiagramError::Malformed(format!("strand {} has equal endpoints but crossings", i + 1)));
                }
                strands.push(vec![]);
                upward.push(conventional_upward(i));
                continue;
            }
            let (start, end, up) = if g.enters.contains_key(&bot) {
                (bot, top, true)
            } else if g.enters.contains_key(&top) {
                (top, bot, false)
            } else {
                return Err(DiagramError::Malformed(format!("strand {} has no incoming end", i + 1)));
            };
            let mut seq = Vec::new();
            let mut lab = start;
            while lab != end {
                if !used.insert(lab) {
                    return Err(DiagramError::Malformed(format!("arc {lab} reused")));
                }
                let v = *g.enters.get(&lab).ok_or_else(|| DiagramError::Malformed(format!("arc {lab} ends in the box")))?;
                seq.push(v);
                lab = g.leaves[&v];
            }
            used.insert(end);
            if g.enters.contains_key(&end) {
                return Err(DiagramError::Malformed(format!("endpoint arc {end} continues into a crossing")));
            }
            strands.push(seq);
            upward.push(up);
        }
        if used.len() != g.labels.len() {
            return Err(DiagramError::Malformed("closed components inside a string link".into()));
        }
        Self::new(strands, cr.iter().map(|c| c.sign).collect(), upward)
    }

    pub fn from_pd_json(v: &Value) -> Result<Self, DiagramError> {
        let cr = parse_pd_crossings(v.get("crossings").ok_or_else(|| DiagramError::Malformed("missing crossings".into()))?)?;
        let ends = v
            .get("endpoints")
            .and_then(Value::as_array)
            .ok_or_else(|| DiagramError::Malformed("missing endpoints".into()))?;
        let endpoints = ends
            .iter()
            .map(|e| match e.as_array().map(|a| a.iter().map(Value::as_i64).collect::<Vec<_>>()) {
                Some(v) if v.len() == 2 && v.iter().all(Option::is_some) => Ok([v[0].unwrap(), v[1].unwrap()]),
                _ => Err(DiagramError::Malformed(format!("bad endpoint pair {e}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_pd(&cr, &endpoints)
    }

    /// PD tangle code: arcs numbered along each strand in traversal order.
    pub fn to_pd_json(&self) -> Value {
        let n = self.signs.len();
        let mut enter = vec![[0i64; 2]; n];
        let mut leave = vec![[0i64; 2]; n];
        let mut base = 1i64;
        let mut endpoints = Vec::new();
        for (i, s) in self.strands.iter().enumerate() {
            let k = s.len() as i64;
            for (p, &(c, ov)) in s.iter().enumerate() {
                enter[c][ov as usize] = base + p as i64;
                leave[c][ov as usize] = base + p as i64 + 1;
            }
            let (first, last) = (base, base + k);
            endpoints.push(if self.upward[i] { [first, last] } else { [last, first] });
            base += k + 1;
        }
        let cr: Vec<Value> = (0..n)
            .map(|c| {
                let (ui, uo, oi, oo) = (enter[c][0], leave[c][0], enter[c][1], leave[c][1]);
                let a = if self.signs[c] > 0 { [ui, oo, uo, oi] } else { [ui, oi, uo, oo] };
                json!([a[0], a[1], a[2], a[3], if self.signs[c] > 0 { "+" } else { "-" }])
            })
            .collect();
        json!({"strands": self.m, "crossings": cr, "endpoints": endpoints})
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn strands(&self) -> &[Vec<Visit>] {
        &self.strands
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn upward(&self) -> &[bool] {
        &self.upward
    }

    /// Wirtinger presentation; arc `k` of a strand lies between its `k`-th and
    /// `(k+1)`-th underpasses in traversal order.
    pub fn wirtinger(&self) -> WirtingerPresentation {
        let mut first_arc = Vec::with_capacity(self.m);
        let mut n = 0;
        for s in &self.strands {
            first_arc.push(n);
            n += 1 + s.iter().filter(|v| !v.1).count();
        }
        // arc containing each over visit
        let mut over_arc = vec![0; self.signs.len()];
        for (i, s) in self.strands.iter().enumerate() {
            let mut k = 0;
            for &(c, ov) in s {
                if ov {
                    over_arc[c] = first_arc[i] + k;
                } else {
                    k += 1;
                }
            }
        }
        let mut relations = Vec::new();
        let mut strands = Vec::new();
        let mut meridians = Vec::new();
        for (i, s) in self.strands.iter().enumerate() {
            let mut unders = Vec::new();
            let mut k = 0;
            for &(c, ov) in s {
                if !ov {
                    unders.push(relations.len());
                    relations.push(Relation {
                        entering: first_arc[i] + k,
                        leaving: first_arc[i] + k + 1,
                        over: over_arc[c],
                        sign: self.signs[c],
                    });
                    k += 1;
                }
            }
            let arcs: Vec<usize> = (0..=k).map(|j| first_arc[i] + j).collect();
            meridians.push(if self.upward[i] { arcs[0] } else { arcs[k] });
            strands.push(StrandArcs { arcs, unders, upward: self.upward[i] });
        }
        WirtingerPresentation { generators: n, relations, meridians, strands }
    }

    /// Closure `L_S`: each strand joined to itself by an arc outside the box.
    pub fn close_link(&self) -> LinkDiagram {
        LinkDiagram { components: self.strands.clone(), signs: self.signs.clone() }
    }

    /// Knot closure `K_S`: strands joined in order `1..m` by the bands.
    pub fn close_knot(&self) -> LinkDiagram {
        LinkDiagram { components: vec![self.strands.concat()], signs: self.signs.clone() }
    }
}

/// Linking numbers between components: half the signed count of mixed crossings.
pub fn linking_matrix(d: &LinkDiagram) -> LinkingData {
    let m = d.components.len();
    let mut owner = vec![Vec::new(); d.crossings()];
    for (i, comp) in d.components.iter().enumerate() {
        for &(c, _) in comp {
            owner[c].push(i);
        }
    }
    let mut l = vec![vec![0i64; m]; m];
    for (c, o) in owner.iter().enumerate() {
        if o[0] != o[1] {
            l[o[0]][o[1]] += d.signs[c] as i64;
            l[o[1]][o[0]] += d.signs[c] as i64;
        }
    }
    for row in &mut l {
        for x in row.iter_mut() {
            *x /= 2;
        }
    }
    LinkingData::from_offdiagonal(l)
}

/// ∇ by the skein relation `∇₊ - ∇₋ = z ∇₀`, descending from the component start points.
pub fn conway_skein(d: &LinkDiagram, max_crossings: usize) -> Result<ConwayPoly, DiagramError> {
    if d.crossings() > max_crossings {
        return Err(DiagramError::TooManyCrossings(d.crossings(), max_crossings));
    }
    let mut signs = d.signs.clone();
    Ok(skein(d.components.clone(), &mut signs))
}

fn skein(comps: Vec<Vec<Visit>>, signs: &mut [i8]) -> ConwayPoly {
    let mut seen = BTreeSet::new();
    for comp in &comps {
        for &(c, ov) in comp {
            if !seen.insert(c) {
                continue;
            }
            if !ov {
                return skein_step(comps, signs, c);
            }
        }
    }
    if comps.len() == 1 {
        ConwayPoly::one()
    } else {
        ConwayPoly::zero()
    }
}

fn skein_step(comps: Vec<Vec<Visit>>, signs: &mut [i8], c: usize) -> ConwayPoly {
    let eps = signs[c];
    let switched: Vec<Vec<Visit>> = comps
        .iter()
        .map(|comp| comp.iter().map(|&(cc, ov)| if cc == c { (cc, !ov) } else { (cc, ov) }).collect())
        .collect();
    signs[c] = -eps;
    let a = skein(switched, signs);
    signs[c] = eps;

    let locs: Vec<(usize, usize)> = comps
        .iter()
        .enumerate()
        .flat_map(|(ci, comp)| comp.iter().enumerate().filter(|(_, v)| v.0 == c).map(move |(j, _)| (ci, j)))
        .collect();
    let ((c1, j1), (c2, j2)) = (locs[0], locs[1]);
    let mut smoothed: Vec<Vec<Visit>>;
    if c1 == c2 {
        let comp = &comps[c1];
        let x = comp[j1 + 1..j2].to_vec();
        let y: Vec<Visit> = comp[j2 + 1..].iter().chain(&comp[..j1]).copied().collect();
        smoothed = comps[..c1].to_vec();
        smoothed.push(y);
        smoothed.push(x);
        smoothed.extend_from_slice(&comps[c1 + 1..]);
    } else {
        let (pa, pb) = (&comps[c1], &comps[c2]);
        let joined: Vec<Visit> = pa[j1 + 1..]
            .iter()
            .chain(&pa[..j1])
            .chain(&pb[j2 + 1..])
            .chain(&pb[..j2])
            .copied()
            .collect();
        smoothed = comps.iter().enumerate().filter(|(i, _)| *i != c1 && *i != c2).map(|(_, x)| x.clone()).collect();
        smoothed.insert(c1, joined);
    }
    let b = skein(smoothed, signs);
    a.add(&b.shift(1).scale(&eps.into()))
}

/// A string link with normalized longitudes and, when known, its diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StringLink {
    pub m: usize,
    pub longitudes: Vec<Word>,
    pub linking: LinkingData,
    pub diagram: Option<StringLinkDiagram>,
    pub braid: Option<Braid>,
}

impl StringLink {
    /// Longitudes read from the diagram's Wirtinger presentation to depth `q`.
    pub fn from_diagram(d: StringLinkDiagram, q: usize) -> Result<Self, DiagramError> {
        let longitudes = nilpotent_longitudes(&d.wirtinger(), q)?;
        Ok(StringLink {
            m: d.m(),
            linking: LinkingData::from_longitudes(&longitudes),
            longitudes,
            diagram: Some(d),
            braid: None,
        })
    }

    pub fn from_braid(b: &Braid, q: usize) -> Result<Self, DiagramError> {
        let mut s = Self::from_diagram(StringLinkDiagram::from_braid(b)?, q)?;
        s.braid = Some(b.clone());
        Ok(s)
    }

    /// Longitudes must already have exponent sum zero.
    pub fn from_longitudes(longitudes: Vec<Word>) -> Result<Self, DiagramError> {
        let m = longitudes.len();
        for (i, l) in longitudes.iter().enumerate() {
            if l.rank() > m {
                return Err(MilnorError::GeneratorRange(i + 1, l.rank(), m).into());
            }
            if l.exponent_sum() != 0 {
                return Err(MilnorError::Unnormalized(i + 1, l.exponent_sum()).into());
            }
        }
        Ok(StringLink { m, linking: LinkingData::from_longitudes(&longitudes), longitudes, diagram: None, braid: None })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    /// Truncation degree of the comparison.
    pub degree: usize,
    /// Both polynomials in the sign convention of the factorization, `∇(z) = ∇_skein(-z)`.
    pub nabla_l: ConwayPoly,
    pub nabla_k: ConwayPoly,
    pub gamma: GammaResult,
    pub lhs: ZSeries,
    pub rhs: ZSeries,
    pub mismatches: Vec<usize>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "nabla_l": self.nabla_l.to_json(),
            "nabla_k": self.nabla_k.to_json(),
            "gamma_z": self.gamma.gamma_z.to_json(),
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "mismatch_degrees": self.mismatches,
            "pass": self.pass(),
        })
    }
}

/// Compare `∇_L` with `∇_K Γ` through degree `q - 1`.
pub fn verify_factorization(s: &StringLink, q: usize, max_crossings: usize) -> Result<VerificationReport, DiagramError> {
    let d = s.diagram.as_ref().ok_or(DiagramError::NoDiagram)?;
    let nabla_l = conway_skein(&d.close_link(), max_crossings)?.mirror();
    let nabla_k = conway_skein(&d.close_knot(), max_crossings)?.mirror();
    let g = gamma(&mu_table(&s.longitudes, q)?)?;
    let deg = q - 1;
    let lhs = nabla_l.to_zseries(deg);
    let rhs = &nabla_k.to_zseries(deg) * &g.gamma_z;
    let mismatches = (0..=deg).filter(|&k| lhs.coeff(k) != rhs.coeff(k)).collect();
    Ok(VerificationReport { degree: deg, nabla_l, nabla_k, gamma: g, lhs, rhs, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::conway_from_seifert;

    fn braid(m: usize, w: &[i32]) -> Braid {
        Braid::new(m, w.to_vec()).unwrap()
    }

    #[test]
    fn hopf_closures() {
        let d = StringLinkDiagram::from_braid(&braid(2, &[1, 1])).unwrap();
        let l = d.close_link();
        assert_eq!(l.signs(), &[1, 1]);
        assert_eq!(conway_skein(&l, 18).unwrap(), ConwayPoly::from_ints(&[0, 1]));
        assert_eq!(conway_skein(&l, 18).unwrap().mirror(), ConwayPoly::from_ints(&[0, -1]));
        assert_eq!(conway_skein(&d.close_knot(), 18).unwrap(), ConwayPoly::one());
        let link = linking_matrix(&l);
        assert_eq!(link.l, vec![vec![-1, 1], vec![1, -1]]);
    }

    #[test]
    fn all_up_rejected() {
        assert_eq!(
            StringLinkDiagram::from_braid_oriented(&braid(2, &[1, 1]), &[true, true]),
            Err(DiagramError::Orientation(2))
        );
    }

    #[test]
    fn trivial_diagrams() {
        let d = StringLinkDiagram::from_braid(&braid(3, &[])).unwrap();
        assert_eq!(conway_skein(&d.close_link(), 18).unwrap(), ConwayPoly::zero());
        assert_eq!(conway_skein(&d.close_knot(), 18).unwrap(), ConwayPoly::one());
        assert_eq!(conway_skein(&LinkDiagram::unknot(), 18).unwrap(), ConwayPoly::one());
        let s = StringLink::from_braid(&braid(3, &[]), 5).unwrap();
        assert!(s.longitudes.iter().all(|w| w.is_empty()));
        assert!(verify_factorization(&s, 5, 18).unwrap().pass());
    }

    #[test]
    fn trefoil_matches_seifert() {
        let t = LinkDiagram::braid_closure(&braid(2, &[1, 1, 1]));
        assert_eq!(t.components().len(), 1);
        let sk = conway_skein(&t, 18).unwrap();
        assert_eq!(sk, ConwayPoly::from_ints(&[1, 0, 1]));
        assert_eq!(sk, conway_from_seifert(&[vec![-1, 1], vec![0, -1]]).unwrap().0);
    }

    #[test]
    fn borromean_closure() {
        let d = StringLinkDiagram::from_braid(&braid(3, &[1, -2, 1, -2, 1, -2])).unwrap();
        let l = d.close_link();
        assert!(linking_matrix(&l).is_split());
        let c = conway_skein(&l, 18).unwrap();
        assert!(!c.is_zero());
        assert_eq!(c.coeff(4).magnitude(), &1u32.into());
    }

    #[test]
    fn crossing_cap() {
        let t = LinkDiagram::braid_closure(&braid(2, &[1, 1, 1]));
        assert_eq!(conway_skein(&t, 2), Err(DiagramError::TooManyCrossings(3, 2)));
    }

    #[test]
    fn pd_roundtrip() {
        let t = LinkDiagram::braid_closure(&braid(3, &[1, -2, 1, -2, 1, -2]));
        let v = t.to_pd_json();
        let back = LinkDiagram::from_pd_json(&v).unwrap();
        assert_eq!(conway_skein(&back, 18).unwrap(), conway_skein(&t, 18).unwrap());
        assert_eq!(linking_matrix(&back), linking_matrix(&t));
        let bad = json!({"crossings": [[1, 2, 3, 4, "+"]]});
        assert!(LinkDiagram::from_pd_json(&bad).is_err());
    }

    #[test]
    fn tangle_pd_roundtrip() {
        for w in [vec![1i32, 1], vec![1, -2, 1, -2, 1, -2], vec![2, 2, 1, 1]] {
            let m = if w.iter().any(|&x| x.abs() == 2) { 3 } else { 2 };
            let d = StringLinkDiagram::from_braid(&braid(m, &w)).unwrap();
            let back = StringLinkDiagram::from_pd_json(&d.to_pd_json()).unwrap();
            assert_eq!(back.close_link(), d.close_link());
            let a = StringLink::from_diagram(back, 6).unwrap();
            let b = StringLink::from_diagram(d, 6).unwrap();
            assert_eq!(a.longitudes, b.longitudes);
        }
    }

    #[test]
    fn hopf_longitudes_from_diagram() {
        let s = StringLink::from_braid(&braid(2, &[1, 1]), 6).unwrap();
        assert_eq!(s.longitudes[0], Word::parse("X1^-1 X2").unwrap());
        assert_eq!(s.longitudes[1], Word::parse("X2^-1 X1").unwrap());
        let r = verify_factorization(&s, 9, 18).unwrap();
        assert!(r.pass());
        assert_eq!(r.nabla_l, ConwayPoly::from_ints(&[0, -1]));
    }
}
