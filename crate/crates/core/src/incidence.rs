//! Point-line incidence geometries and the generalized polygon axioms.
//!
//! The incidence graph has the points as vertices `0..n_points` and the
//! lines as vertices `n_points..n_points + n_lines`.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::BitMatrix;

/// The Ree-Tits octagon O(2) in `ig` format.
pub const O2_IG: &str = include_str!("../data/o2.ig");

#[derive(Debug, Error)]
pub enum IgError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: point index {index} out of range (n_points = {n_points})")]
    OutOfRange { line: usize, index: usize, n_points: usize },
    #[error("line {line}: point {index} repeated within a line")]
    RepeatedPoint { line: usize, index: usize },
    #[error("line {line}: duplicate of the line given at line {first}")]
    DuplicateLine { line: usize, first: usize },
    #[error("expected {expected} lines, found {found}")]
    LineCount { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DistanceError {
    #[error("points {a} and {b} are at odd distance {dist}")]
    OddDistance { a: usize, b: usize, dist: usize },
    #[error("points {a} and {b} are not connected")]
    Disconnected { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceGeometry {
    n_points: usize,
    lines: Vec<Vec<usize>>,
    point_lines: Vec<Vec<usize>>,
}

impl IncidenceGeometry {
    /// Validates indices, repeated points and duplicate lines.
    pub fn new(n_points: usize, lines: Vec<Vec<usize>>) -> Result<Self, IgError> {
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (i, l) in lines.iter().enumerate() {
            check_line(l, n_points, i + 1)?;
            let mut key = l.clone();
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(IgError::DuplicateLine { line: i + 1, first });
            }
            seen.insert(key, i + 1);
        }
        Ok(Self::from_checked(n_points, lines))
    }

    fn from_checked(n_points: usize, lines: Vec<Vec<usize>>) -> Self {
        let mut point_lines = vec![Vec::new(); n_points];
        for (i, l) in lines.iter().enumerate() {
            for &p in l {
                point_lines[p].push(i);
            }
        }
        IncidenceGeometry {
            n_points,
            lines,
            point_lines,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[Vec<usize>] {
        &self.lines
    }

    pub fn lines_through(&self, point: usize) -> &[usize] {
        &self.point_lines[point]
    }

    pub fn n_flags(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }

    fn n_vertices(&self) -> usize {
        self.n_points + self.lines.len()
    }

    /// Neighbours of a vertex of the incidence graph.
    fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let (pts, lns): (&[usize], &[usize]) = if v < self.n_points {
            (&[], &self.point_lines[v])
        } else {
            (&self.lines[v - self.n_points], &[])
        };
        pts.iter().copied().chain(lns.iter().map(move |&l| l + self.n_points))
    }

    /// Breadth-first distances from `root` in the incidence graph (`usize::MAX`
    /// if unreachable) and the length of the shortest cycle closed by a
    /// non-tree edge of this search.
    fn bfs(&self, root: usize) -> (Vec<usize>, Option<usize>) {
        let n = self.n_vertices();
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::with_capacity(n);
        let mut shortest: Option<usize> = None;
        dist[root] = 0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for w in self.neighbours(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    shortest = Some(shortest.map_or(len, |s| s.min(len)));
                }
            }
        }
        (dist, shortest)
    }

    /// Number of points at each even incidence-graph distance `0, 2, 4, ...` from `point`.
    pub fn distance_profile(&self, point: usize) -> Vec<usize> {
        let (dist, _) = self.bfs(point);
        let mut profile = Vec::new();
        for &d in &dist[..self.n_points] {
            if d == usize::MAX {
                continue;
            }
            let level = d / 2;
            if profile.len() <= level {
                profile.resize(level + 1, 0);
            }
            profile[level] += 1;
        }
        profile
    }

    /// `Some(profile)` if every point has the same distance profile.
    pub fn constant_distance_profile(&self) -> Option<Vec<usize>> {
        let profiles: Vec<Vec<usize>> = (0..self.n_points)
            .into_par_iter()
            .map(|p| self.distance_profile(p))
            .collect();
        let first = profiles.first()?.clone();
        profiles.iter().all(|p| *p == first).then_some(first)
    }

    /// Relation matrices `A_0, ..., A_m` on points, where `A_i[a][b] = 1`
    /// iff `a` and `b` are at distance `2i` in the incidence graph and `2m`
    /// is the largest distance that occurs.
    pub fn distance_relation_matrices(&self) -> Result<Vec<BitMatrix>, DistanceError> {
        let n = self.n_points;
        let rows: Result<Vec<Vec<usize>>, DistanceError> = (0..n)
            .into_par_iter()
            .map(|a| {
                let (dist, _) = self.bfs(a);
                dist[..n]
                    .iter()
                    .enumerate()
                    .map(|(b, &d)| {
                        if d == usize::MAX {
                            Err(DistanceError::Disconnected { a, b })
                        } else if d % 2 == 1 {
                            Err(DistanceError::OddDistance { a, b, dist: d })
                        } else {
                            Ok(d / 2)
                        }
                    })
                    .collect()
            })
            .collect();
        let rows = rows?;
        let classes = rows.iter().flatten().max().map_or(0, |&m| m + 1);
        let mut mats = vec![BitMatrix::zeros(n, n); classes];
        for (a, row) in rows.iter().enumerate() {
            for (b, &i) in row.iter().enumerate() {
                mats[i].set(a, b, true);
            }
        }
        Ok(mats)
    }
}

fn check_line(l: &[usize], n_points: usize, line: usize) -> Result<(), IgError> {
    let mut sorted = l.to_vec();
    sorted.sort_unstable();
    for &p in &sorted {
        if p >= n_points {
            return Err(IgError::OutOfRange {
                line,
                index: p,
                n_points,
            });
        }
    }
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(IgError::RepeatedPoint { line, index: w[0] });
    }
    Ok(())
}

fn syntax(line: usize, msg: impl Into<String>) -> IgError {
    IgError::Syntax { line, msg: msg.into() }
}

/// Parses the `ig` format: `ig 1`, `points N`, `lines M`, then one line per
/// geometry line listing its 0-based points. `#` starts a comment line.
pub fn load_geometry(source: impl BufRead) -> Result<IncidenceGeometry, IgError> {
    let mut header: Vec<(usize, String)> = Vec::new();
    let mut n_points = 0usize;
    let mut n_lines = 0usize;
    let mut lines: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for (idx, text) in source.lines().enumerate() {
        let lineno = idx + 1;
        let text = text?;
        let t = text.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if header.len() < 3 {
            let expect = ["ig", "points", "lines"][header.len()];
            let mut it = t.split_whitespace();
            if it.next() != Some(expect) {
                return Err(syntax(lineno, format!("expected `{expect}` header line")));
            }
            let value: usize = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| syntax(lineno, format!("bad value in `{expect}` header")))?;
            if it.next().is_some() {
                return Err(syntax(lineno, "trailing tokens in header"));
            }
            match header.len() {
                0 if value != 1 => return Err(syntax(lineno, format!("unsupported version {value}"))),
                1 => n_points = value,
                2 => n_lines = value,
                _ => {}
            }
            header.push((lineno, t.to_string()));
            continue;
        }
        let line: Vec<usize> = t
            .split_whitespace()
            .map(|tok| {
                tok.parse()
                    .map_err(|_| syntax(lineno, format!("bad point index `{tok}`")))
            })
            .collect::<Result<_, _>>()?;
        check_line(&line, n_points, lineno)?;
        let mut key = line.clone();
        key.sort_unstable();
        if let Some(&first) = seen.get(&key) {
            return Err(IgError::DuplicateLine { line: lineno, first });
        }
        if lines.len() == n_lines {
            return Err(syntax(lineno, format!("more than {n_lines} lines")));
        }
        seen.insert(key, lineno);
        lines.push(line);
    }
    if header.len() < 3 {
        return Err(syntax(header.last().map_or(1, |h| h.0 + 1), "incomplete header"));
    }
    if lines.len() != n_lines {
        return Err(IgError::LineCount {
            expected: n_lines,
            found: lines.len(),
        });
    }
    Ok(IncidenceGeometry::from_checked(n_points, lines))
}

pub fn bundled_o2() -> IncidenceGeometry {
    load_geometry(O2_IG.as_bytes()).expect("bundled O(2) data parses")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    LineSize {
        line: usize,
        size: usize,
        expected: usize,
    },
    PointDegree {
        point: usize,
        degree: usize,
        expected: usize,
    },
    Disconnected,
    Diameter {
        diameter: usize,
        expected: usize,
    },
    Girth {
        girth: Option<usize>,
        expected: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LineSize { line, size, expected } => {
                write!(f, "line {line} has {size} points, expected {expected}")
            }
            Violation::PointDegree {
                point,
                degree,
                expected,
            } => {
                write!(f, "point {point} lies on {degree} lines, expected {expected}")
            }
            Violation::Disconnected => write!(f, "incidence graph is disconnected"),
            Violation::Diameter { diameter, expected } => {
                write!(f, "incidence graph has diameter {diameter}, expected {expected}")
            }
            Violation::Girth {
                girth: Some(g),
                expected,
            } => {
                write!(f, "incidence graph has girth {g}, expected {expected}")
            }
            Violation::Girth { girth: None, expected } => {
                write!(f, "incidence graph is acyclic, expected girth {expected}")
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolygonCertificate {
    pub n: usize,
    pub s: usize,
    pub r: usize,
    pub ok: bool,
    /// First violated axiom, if any.
    pub witness: Option<String>,
    pub violations: Vec<Violation>,
    pub diameter: Option<usize>,
    pub girth: Option<usize>,
}

/// Checks the generalized `n`-gon axioms of order `(s, r)` exactly: every
/// line has `s + 1` points, every point is on `r + 1` lines, and the
/// incidence graph has diameter `n` and girth `2n` (breadth-first search
/// from every vertex). All violated axioms are reported.
pub fn verify_generalized_polygon(g: &IncidenceGeometry, n: usize, s: usize, r: usize) -> PolygonCertificate {
    let mut violations = Vec::new();
    if let Some((line, l)) = g.lines.iter().enumerate().find(|(_, l)| l.len() != s + 1) {
        violations.push(Violation::LineSize {
            line,
            size: l.len(),
            expected: s + 1,
        });
    }
    if let Some((point, ls)) = g.point_lines.iter().enumerate().find(|(_, ls)| ls.len() != r + 1) {
        violations.push(Violation::PointDegree {
            point,
            degree: ls.len(),
            expected: r + 1,
        });
    }
    let searches: Vec<(Option<usize>, Option<usize>)> = (0..g.n_vertices())
        .into_par_iter()
        .map(|v| {
            let (dist, cycle) = g.bfs(v);
            let ecc = dist.iter().copied().max();
            (ecc.filter(|&e| e != usize::MAX), cycle)
        })
        .collect();
    let connected = searches.iter().all(|(ecc, _)| ecc.is_some());
    let diameter = if connected {
        searches.iter().filter_map(|(e, _)| *e).max()
    } else {
        None
    };
    let girth = searches.iter().filter_map(|(_, c)| *c).min();
    if g.n_vertices() == 0 || !connected {
        violations.push(Violation::Disconnected);
    } else if diameter != Some(n) {
        violations.push(Violation::Diameter {
            diameter: diameter.unwrap_or(0),
            expected: n,
        });
    }
    if girth != Some(2 * n) {
        violations.push(Violation::Girth { girth, expected: 2 * n });
    }
    PolygonCertificate {
        n,
        s,
        r,
        ok: violations.is_empty(),
        witness: violations.first().map(ToString::to_string),
        violations,
        diameter,
        girth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The generalized triangle PG(2,2) (Fano plane): order (2,2).
    fn fano() -> IncidenceGeometry {
        let lines = vec![
            vec![0, 1, 2],
            vec![0, 3, 4],
            vec![0, 5, 6],
            vec![1, 3, 5],
            vec![1, 4, 6],
            vec![2, 3, 6],
            vec![2, 4, 5],
        ];
        IncidenceGeometry::new(7, lines).unwrap()
    }

    /// GQ(2,2): points are the 15 pairs of {0..5}, lines the 15 perfect matchings.
    fn w2() -> IncidenceGeometry {
        let mut pairs = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                pairs.push((a, b));
            }
        }
        let idx = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
        let mut lines = Vec::new();
        for b in 1..6 {
            let rest: Vec<usize> = (1..6).filter(|&x| x != b).collect();
            for (c, d, e, f) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
                lines.push(vec![idx(0, b), idx(rest[c], rest[d]), idx(rest[e], rest[f])]);
            }
        }
        IncidenceGeometry::new(15, lines).unwrap()
    }

    #[test]
    fn parses_single_line() {
        let g = load_geometry("ig 1\npoints 3\nlines 1\n0 1 2\n".as_bytes()).unwrap();
        assert_eq!(g.n_points(), 3);
        assert_eq!(g.n_lines(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load_geometry("ig 1\npoints 3\nlines 1\n0 1 3\n".as_bytes()).unwrap_err();
        assert!(
            matches!(
                err,
                IgError::OutOfRange {
                    line: 4,
                    index: 3,
                    n_points: 3
                }
            ),
            "{err}"
        );
        let err = load_geometry("ig 1\npoints 3\nlines 2\n0 1\n# c\n1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IgError::DuplicateLine { line: 6, first: 4 }), "{err}");
        let err = load_geometry("ig 1\npoints 3\nlines 1\n0 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IgError::RepeatedPoint { line: 4, .. }));
        let err = load_geometry("ig 2\npoints 3\nlines 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IgError::Syntax { line: 1, .. }));
        let err = load_geometry("ig 1\nlines 3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IgError::Syntax { line: 2, .. }));
        let err = load_geometry("ig 1\npoints 3\nlines 2\n0 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IgError::LineCount { expected: 2, found: 1 }));
        let err = load_geometry("ig 1\npoints 3\nlines 1\n0 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IgError::Syntax { line: 4, .. }));
    }

    #[test]
    fn constructor_validates() {
        assert!(matches!(
            IncidenceGeometry::new(2, vec![vec![0, 1], vec![1, 0]]),
            Err(IgError::DuplicateLine { line: 2, first: 1 })
        ));
        assert!(IncidenceGeometry::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn single_line_is_not_an_octagon() {
        let g = load_geometry("ig 1\npoints 3\nlines 1\n0 1 2\n".as_bytes()).unwrap();
        let cert = verify_generalized_polygon(&g, 8, 2, 4);
        assert!(!cert.ok);
        assert!(cert.violations.iter().any(|v| matches!(
            v,
            Violation::Diameter {
                diameter: 2,
                expected: 8
            }
        )));
        assert!(cert.witness.is_some());
    }

    #[test]
    fn small_polygons_verify() {
        let cert = verify_generalized_polygon(&fano(), 3, 2, 2);
        assert!(cert.ok, "{:?}", cert.violations);
        assert_eq!(cert.girth, Some(6));
        let cert = verify_generalized_polygon(&w2(), 4, 2, 2);
        assert!(cert.ok, "{:?}", cert.violations);
        let cert = verify_generalized_polygon(&w2(), 3, 2, 2);
        assert!(!cert.ok);
    }

    #[test]
    fn fano_distance_relations() {
        let a = fano().distance_relation_matrices().unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0], BitMatrix::identity(7));
        assert_eq!(a[1].constant_row_sum(), Some(6));
        let w = w2().distance_relation_matrices().unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w[1].constant_row_sum(), Some(6));
        assert_eq!(w[2].constant_row_sum(), Some(8));
    }

    #[test]
    fn disconnected_points_are_an_error() {
        let g = IncidenceGeometry::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(matches!(
            g.distance_relation_matrices(),
            Err(DistanceError::Disconnected { .. })
        ));
        let cert = verify_generalized_polygon(&g, 2, 1, 0);
        assert!(cert.violations.contains(&Violation::Disconnected));
    }

    #[test]
    fn bundled_o2_counts() {
        let g = bundled_o2();
        assert_eq!(g.n_points(), 1755);
        assert_eq!(g.n_lines(), 2925);
        // (1+s)(1+sr+(sr)^2+(sr)^3) with s=2, r=4, and the flag count both ways.
        assert_eq!(3 * (1 + 8 + 64 + 512), 1755);
        assert_eq!(g.n_flags(), 1755 * 5);
        assert_eq!(g.n_flags(), 2925 * 3);
    }
}
