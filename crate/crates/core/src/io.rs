//! Plain-text formats for points, spanners, trees, tours, cycles and hierarchies.
//!
//! Blank lines and lines starting with `#` are skipped on input, except for
//! the `# dim=<d>` header of point files.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::euler::EulerTour;
use crate::geometry::PointSet;
use crate::levels::level_t;
use crate::partition::Partition;
use crate::pipeline::{PartitionHierarchy, SpanningTree, TreeEdge};
use crate::spanner::LeveledSpanner;
use crate::tsp::HamiltonianCycle;

fn parse_err(line: usize, detail: impl Into<String>) -> Error {
    Error::Parse { line, detail: detail.into() }
}

/// Numbered data lines with comments stripped.
fn data_lines(r: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| Ok((i + 1, t.to_string())))
        }
    })
}

fn field<T: std::str::FromStr>(line: usize, tok: Option<&str>, name: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {name}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {name} `{tok}`")))
}

fn exponent_of(line: usize, t: f64) -> Result<u32> {
    let e = t.log2().round();
    if !(0.0..=63.0).contains(&e) || level_t(e as u32) != t {
        return Err(parse_err(line, format!("level {t} is not a power of 2")));
    }
    Ok(e as u32)
}

pub fn write_points(mut w: impl Write, points: &PointSet) -> Result<()> {
    writeln!(w, "# dim={}", points.dim())?;
    for row in points.rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", cells.join(" "))?;
    }
    Ok(())
}

/// Reads whitespace-separated coordinates, one point per line.
pub fn read_points(r: impl BufRead) -> Result<PointSet> {
    let mut dim: Option<usize> = None;
    let mut coords = Vec::new();
    let mut rows = 0usize;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("dim=") {
                if rows > 0 || dim.is_some() {
                    return Err(parse_err(i + 1, "dim header must come first"));
                }
                dim = Some(field(i + 1, Some(v.trim()), "dimension")?);
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let start = coords.len();
        for tok in t.split_whitespace() {
            let x: f64 = field(i + 1, Some(tok), "coordinate")?;
            if !x.is_finite() {
                return Err(parse_err(i + 1, format!("non-finite coordinate `{tok}`")));
            }
            coords.push(x);
        }
        let got = coords.len() - start;
        match dim {
            Some(d) if d != got => return Err(parse_err(i + 1, format!("expected {d} coordinates, found {got}"))),
            None => dim = Some(got),
            _ => {}
        }
        rows += 1;
    }
    let d = dim.ok_or_else(|| parse_err(0, "no points"))?;
    if rows == 0 {
        return Err(parse_err(0, "no points"));
    }
    PointSet::new(coords, d)
}

/// One `t u v` line per spanner edge, levels ascending.
pub fn write_spanner(mut w: impl Write, spanner: &LeveledSpanner) -> Result<()> {
    for (&e, edges) in &spanner.levels {
        for (u, v) in edges.iter() {
            writeln!(w, "{} {u} {v}", level_t(e))?;
        }
    }
    Ok(())
}

pub fn read_spanner(r: impl BufRead) -> Result<BTreeMap<u32, Vec<(u32, u32)>>> {
    let mut out: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for item in data_lines(r) {
        let (i, line) = item?;
        let mut it = line.split_whitespace();
        let e = exponent_of(i, field(i, it.next(), "level")?)?;
        out.entry(e).or_default().push((field(i, it.next(), "u")?, field(i, it.next(), "v")?));
    }
    Ok(out)
}

/// `u v w t stage` per tree edge, with `w` in input units.
pub fn write_tree(mut w: impl Write, tree: &SpanningTree) -> Result<()> {
    for e in &tree.edges {
        writeln!(w, "{} {} {} {} {}", e.u, e.v, e.weight, level_t(e.level), e.stage)?;
    }
    Ok(())
}

pub fn read_tree(r: impl BufRead) -> Result<SpanningTree> {
    let mut edges = Vec::new();
    for item in data_lines(r) {
        let (i, line) = item?;
        let mut it = line.split_whitespace();
        edges.push(TreeEdge {
            u: field(i, it.next(), "u")?,
            v: field(i, it.next(), "v")?,
            weight: field(i, it.next(), "weight")?,
            level: exponent_of(i, field(i, it.next(), "level")?)?,
            stage: field(i, it.next(), "stage")?,
        });
    }
    Ok(SpanningTree { edges })
}

/// `i u v` per directed edge, positions from 1.
pub fn write_tour(mut w: impl Write, tour: &EulerTour) -> Result<()> {
    for (i, (u, v)) in tour.seq.iter().enumerate() {
        writeln!(w, "{} {u} {v}", i + 1)?;
    }
    Ok(())
}

pub fn read_tour(r: impl BufRead) -> Result<EulerTour> {
    let mut seq = Vec::new();
    for item in data_lines(r) {
        let (i, line) = item?;
        let mut it = line.split_whitespace();
        let pos: usize = field(i, it.next(), "position")?;
        if pos != seq.len() + 1 {
            return Err(parse_err(i, format!("position {pos} out of order")));
        }
        seq.push((field(i, it.next(), "u")?, field(i, it.next(), "v")?));
    }
    Ok(EulerTour { seq })
}

pub fn write_cycle(mut w: impl Write, cycle: &HamiltonianCycle) -> Result<()> {
    for id in &cycle.order {
        writeln!(w, "{id}")?;
    }
    Ok(())
}

pub fn read_cycle(r: impl BufRead) -> Result<Vec<u32>> {
    data_lines(r)
        .map(|item| {
            let (i, line) = item?;
            field(i, Some(line.as_str()), "id")
        })
        .collect()
}

/// `t id leader` for every point at every level.
pub fn write_hierarchy(mut w: impl Write, hierarchy: &PartitionHierarchy) -> Result<()> {
    for (&e, p) in &hierarchy.levels {
        let t = level_t(e);
        for (id, leader) in p.leaders().iter().enumerate() {
            writeln!(w, "{t} {id} {leader}")?;
        }
    }
    Ok(())
}

/// Leader maps by level exponent.
pub fn read_hierarchy(r: impl BufRead) -> Result<BTreeMap<u32, Partition>> {
    let mut raw: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for item in data_lines(r) {
        let (i, line) = item?;
        let mut it = line.split_whitespace();
        let e = exponent_of(i, field(i, it.next(), "level")?)?;
        let id: usize = field(i, it.next(), "id")?;
        let leaders = raw.entry(e).or_default();
        if id != leaders.len() {
            return Err(parse_err(i, format!("id {id} out of order")));
        }
        leaders.push(field(i, it.next(), "leader")?);
    }
    raw.into_iter().map(|(e, l)| Ok((e, Partition::from_leaders(l)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Stage;

    #[test]
    fn points_round_trip_exactly() {
        let pts = PointSet::from_rows(&[[0.1, -2.5e-7], [1.0 / 3.0, 1e300]]).unwrap();
        let mut buf = Vec::new();
        write_points(&mut buf, &pts).unwrap();
        assert_eq!(read_points(buf.as_slice()).unwrap(), pts);
    }

    #[test]
    fn point_parse_errors_name_the_line() {
        let err = read_points("1 2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(read_points("# dim=2\n1 2 3\n".as_bytes()).is_err());
        assert!(read_points("1 x\n".as_bytes()).is_err());
        assert!(read_points("".as_bytes()).is_err());
        assert_eq!(read_points("\n# note\n5\n".as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn tree_tour_cycle_round_trip() {
        let tree = SpanningTree {
            edges: vec![
                TreeEdge { u: 0, v: 1, weight: 0.5, level: 3, stage: Stage::Round(2) },
                TreeEdge { u: 1, v: 2, weight: 7.25, level: 5, stage: Stage::Star },
            ],
        };
        let mut buf = Vec::new();
        write_tree(&mut buf, &tree).unwrap();
        assert_eq!(read_tree(buf.as_slice()).unwrap(), tree);

        let tour = EulerTour::new(vec![(0, 1), (1, 0)]);
        let mut buf = Vec::new();
        write_tour(&mut buf, &tour).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "1 0 1\n2 1 0\n");
        assert_eq!(read_tour(buf.as_slice()).unwrap(), tour);

        let cycle = HamiltonianCycle { order: vec![2, 0, 1], cost: 1.0 };
        let mut buf = Vec::new();
        write_cycle(&mut buf, &cycle).unwrap();
        assert_eq!(read_cycle(buf.as_slice()).unwrap(), cycle.order);
    }

    #[test]
    fn hierarchy_round_trip() {
        let h = PartitionHierarchy {
            levels: [(0, Partition::singletons(3)), (1, Partition::from_leaders(vec![0, 0, 2]).unwrap())].into(),
            edges: BTreeMap::new(),
        };
        let mut buf = Vec::new();
        write_hierarchy(&mut buf, &h).unwrap();
        assert_eq!(read_hierarchy(buf.as_slice()).unwrap(), h.levels);
        assert!(read_hierarchy("3 0 0\n".as_bytes()).is_err());
    }
}
