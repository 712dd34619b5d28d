//! Reader and writer for the 2D, attribute-free subset of the Triangle
//! `.node` / `.ele` text formats.
//!
//! Boundary tags travel as vertex markers. On reading, a boundary edge is a
//! lid edge when both of its endpoints map to [`BoundaryTag::Lid`], otherwise
//! a wall edge.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{BoundaryTag, Mesh, MeshError, Point2};

/// Vertex marker written for wall vertices.
pub const WALL_MARKER: i64 = 1;
/// Vertex marker written for lid vertices.
pub const LID_MARKER: i64 = 2;

/// Maps Triangle boundary markers onto boundary tags.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTagMap {
    pub markers: BTreeMap<i64, BoundaryTag>,
    /// Tag for boundary vertices carrying marker 0 or no marker at all.
    pub default: BoundaryTag,
}

impl Default for BoundaryTagMap {
    fn default() -> Self {
        Self {
            markers: BTreeMap::from([(WALL_MARKER, BoundaryTag::Wall), (LID_MARKER, BoundaryTag::Lid)]),
            default: BoundaryTag::Wall,
        }
    }
}

struct Records<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> Records<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let body = l.split('#').next().unwrap_or("");
                let tokens: Vec<&str> = body.split_whitespace().collect();
                (!tokens.is_empty()).then_some((i + 1, tokens))
            })
            .collect();
        Self { lines }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from `{tok}`")))
}

pub fn read_triangle_format(
    node_text: &str,
    ele_text: &str,
    tag_map: &BoundaryTagMap,
) -> Result<Mesh, MeshError> {
    let nodes = Records::new(node_text);
    let (&(hline, ref header), body) = nodes
        .lines
        .split_first()
        .ok_or_else(|| parse_err(1, "empty .node file"))?;
    if header.len() != 4 {
        return Err(parse_err(hline, "node header must have 4 fields"));
    }
    let n: usize = parse_num(header[0], hline, "vertex count")?;
    let dim: usize = parse_num(header[1], hline, "dimension")?;
    let n_attr: usize = parse_num(header[2], hline, "attribute count")?;
    let n_markers: usize = parse_num(header[3], hline, "marker count")?;
    if dim != 2 {
        return Err(parse_err(hline, format!("only 2D meshes are supported, got dimension {dim}")));
    }
    if n_attr != 0 {
        return Err(parse_err(hline, "vertex attributes are not supported"));
    }
    if n_markers > 1 {
        return Err(parse_err(hline, "at most one boundary marker per vertex"));
    }
    if body.len() != n {
        let line = body.last().map_or(hline, |l| l.0);
        return Err(parse_err(line, format!("expected {n} vertex records, found {}", body.len())));
    }
    let base = match body.first() {
        Some((line, toks)) => parse_num::<usize>(toks[0], *line, "vertex index")?,
        None => 0,
    };
    if base > 1 {
        return Err(parse_err(body[0].0, "vertex numbering must start at 0 or 1"));
    }
    let mut vertices = Vec::with_capacity(n);
    let mut markers = Vec::with_capacity(n);
    for (k, (line, toks)) in body.iter().enumerate() {
        if toks.len() != 3 + n_markers {
            return Err(parse_err(*line, format!("expected {} fields", 3 + n_markers)));
        }
        let idx: usize = parse_num(toks[0], *line, "vertex index")?;
        if idx != k + base {
            return Err(parse_err(*line, format!("vertex index {idx} out of sequence")));
        }
        let x: f64 = parse_num(toks[1], *line, "x coordinate")?;
        let y: f64 = parse_num(toks[2], *line, "y coordinate")?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(*line, "non-finite coordinate"));
        }
        vertices.push(Point2::new(x, y));
        let marker = if n_markers == 1 {
            parse_num::<i64>(toks[3], *line, "boundary marker")?
        } else {
            0
        };
        let tag = if marker == 0 {
            tag_map.default
        } else {
            *tag_map
                .markers
                .get(&marker)
                .ok_or_else(|| parse_err(*line, format!("unmapped boundary marker {marker}")))?
        };
        markers.push(tag);
    }

    let eles = Records::new(ele_text);
    let (&(hline, ref header), body) = eles
        .lines
        .split_first()
        .ok_or_else(|| parse_err(1, "empty .ele file"))?;
    if header.len() != 3 {
        return Err(parse_err(hline, "element header must have 3 fields"));
    }
    let m: usize = parse_num(header[0], hline, "triangle count")?;
    let per: usize = parse_num(header[1], hline, "nodes per triangle")?;
    let n_attr: usize = parse_num(header[2], hline, "attribute count")?;
    if per != 3 {
        return Err(parse_err(hline, "only 3-node triangles are supported"));
    }
    if n_attr != 0 {
        return Err(parse_err(hline, "triangle attributes are not supported"));
    }
    if body.len() != m {
        let line = body.last().map_or(hline, |l| l.0);
        return Err(parse_err(line, format!("expected {m} triangle records, found {}", body.len())));
    }
    let mut triangles = Vec::with_capacity(m);
    for (k, (line, toks)) in body.iter().enumerate() {
        if toks.len() != 4 {
            return Err(parse_err(*line, "expected 4 fields"));
        }
        let idx: usize = parse_num(toks[0], *line, "triangle index")?;
        if idx != k + base {
            return Err(parse_err(*line, format!("triangle index {idx} out of sequence")));
        }
        let mut t = [0usize; 3];
        for (slot, tok) in t.iter_mut().zip(&toks[1..]) {
            let v: usize = parse_num(tok, *line, "vertex index")?;
            if v < base || v - base >= n {
                return Err(parse_err(*line, format!("vertex index {v} out of range")));
            }
            *slot = v - base;
        }
        let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y) < 0.0 {
            t.swap(1, 2);
        }
        triangles.push(t);
    }

    let lookup: BTreeMap<(u64, u64), usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.x.to_bits(), p.y.to_bits()), i))
        .collect();
    Mesh::from_triangles(vertices, triangles, |p, q| {
        let tag = |p: Point2| markers[lookup[&(p.x.to_bits(), p.y.to_bits())]];
        if tag(p) == BoundaryTag::Lid && tag(q) == BoundaryTag::Lid {
            BoundaryTag::Lid
        } else {
            BoundaryTag::Wall
        }
    })
}

/// Writes `(node_text, ele_text)` with 1-based numbering. Coordinates use the
/// shortest round-trip representation, so reading the output back yields a
/// bit-identical mesh.
pub fn write_triangle_format(mesh: &Mesh) -> (String, String) {
    let tags = mesh.boundary_vertex_tags();
    let mut node = String::new();
    writeln!(node, "{} 2 0 1", mesh.n_vertices()).unwrap();
    for (i, (p, tag)) in mesh.vertices().iter().zip(&tags).enumerate() {
        let marker = match tag {
            None => 0,
            Some(BoundaryTag::Wall) => WALL_MARKER,
            Some(BoundaryTag::Lid) => LID_MARKER,
        };
        writeln!(node, "{} {:?} {:?} {}", i + 1, p.x, p.y, marker).unwrap();
    }
    let mut ele = String::new();
    writeln!(ele, "{} 3 0", mesh.n_triangles()).unwrap();
    for (i, t) in mesh.triangles().iter().enumerate() {
        writeln!(ele, "{} {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    (node, ele)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODE: &str = "# single triangle\n3 2 0 1\n1 0.0 0.0 1\n2 1.0 0.0 1\n3 0.0 1.0 1\n";

    #[test]
    fn single_simplex() {
        let m = read_triangle_format(NODE, "1 3 0\n1 1 2 3\n", &BoundaryTagMap::default()).unwrap();
        assert_eq!(m.n_triangles(), 1);
        assert_eq!(m.boundary_edges().len(), 3);
    }

    #[test]
    fn clockwise_triangle_is_reoriented() {
        let m = read_triangle_format(NODE, "1 3 0\n1 1 3 2\n", &BoundaryTagMap::default()).unwrap();
        assert!(m.triangle_area(0) > 0.0);
    }

    #[test]
    fn out_of_range_index_names_the_line() {
        let err = read_triangle_format(NODE, "1 3 0\n\n1 1 2 7\n", &BoundaryTagMap::default())
            .unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_unsupported_variants() {
        let map = BoundaryTagMap::default();
        let ele = "1 3 0\n1 1 2 3\n";
        assert!(read_triangle_format("3 3 0 0\n", ele, &map).is_err());
        assert!(read_triangle_format("3 2 1 0\n", ele, &map).is_err());
        assert!(read_triangle_format(NODE, "1 6 0\n1 1 2 3 4 5 6\n", &map).is_err());
        assert!(read_triangle_format(NODE, "1 3 0\n1 1 2 x\n", &map).is_err());
        let bad_marker = NODE.replace("3 0.0 1.0 1", "3 0.0 1.0 9");
        let err = read_triangle_format(&bad_marker, ele, &map).unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 5, .. }), "{err}");
    }

    #[test]
    fn zero_based_numbering_is_accepted() {
        let node = "3 2 0 0\n0 0 0\n1 1 0\n2 0 1\n";
        let m = read_triangle_format(node, "1 3 0\n0 0 1 2\n", &BoundaryTagMap::default()).unwrap();
        assert_eq!(m.triangles()[0], [0, 1, 2]);
    }

    #[test]
    fn generated_meshes_round_trip_bit_exactly() {
        for mesh in [Mesh::semidisk(0.1).unwrap(), Mesh::unit_square(3).unwrap()] {
            let (node, ele) = write_triangle_format(&mesh);
            let back = read_triangle_format(&node, &ele, &BoundaryTagMap::default()).unwrap();
            assert_eq!(back, mesh);
            assert_eq!(write_triangle_format(&back), (node, ele));
        }
    }
}
