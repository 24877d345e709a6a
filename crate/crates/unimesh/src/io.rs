//! Plain-text file formats: meshes, curves, crack paths, propagation
//! histories, and VTK output for visualization.
//!
//! All formats are line oriented; `#` starts a comment. Coordinates are
//! written with Rust's shortest-round-trip float formatting, so write/read
//! cycles are bit exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::curve::{CrackPath, Spline};
use crate::error::IoError;
use crate::fracture::PropagationRecord;
use crate::geometry::{Point2, Triangulation};

fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_string(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &str, line: usize, detail: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_string(),
        line,
        detail: detail.into(),
    }
}

/// Data lines of `text` with their 1-based line numbers; comments (from `#`
/// to end of line) and blank lines are skipped.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_fields<T: std::str::FromStr>(
    path: &str,
    lineno: usize,
    line: &str,
    expected: usize,
    what: &str,
) -> Result<Vec<T>, IoError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != expected {
        return Err(parse_err(
            path,
            lineno,
            format!("expected {expected} {what} fields, got {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse()
                .map_err(|_| parse_err(path, lineno, format!("bad {what} value `{f}`")))
        })
        .collect()
}

pub fn mesh_to_string(mesh: &Triangulation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# universal mesh: vertex count, triangle count");
    let _ = writeln!(s, "{} {}", mesh.vertices.len(), mesh.triangles.len());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn mesh_from_str(text: &str, path: &str) -> Result<Triangulation, IoError> {
    let mut lines = data_lines(text);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty mesh file"))?;
    let counts: Vec<usize> = parse_fields(path, lineno, header, 2, "count")?;
    let (nv, nt) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nv {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unexpected end of file in vertices"))?;
        let xy: Vec<f64> = parse_fields(path, lineno, line, 2, "coordinate")?;
        vertices.push(Point2::new(xy[0], xy[1]));
    }
    for _ in 0..nt {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unexpected end of file in triangles"))?;
        let ijk: Vec<usize> = parse_fields(path, lineno, line, 3, "index")?;
        triangles.push([ijk[0], ijk[1], ijk[2]]);
    }
    if let Some((lineno, _)) = lines.next() {
        return Err(parse_err(path, lineno, "trailing data after triangles"));
    }
    Triangulation::new(vertices, triangles)
        .map_err(|e| parse_err(path, 0, format!("invalid mesh: {e}")))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Triangulation, IoError> {
    let path = path.as_ref();
    mesh_from_str(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &Triangulation) -> Result<(), IoError> {
    write_string(path.as_ref(), &mesh_to_string(mesh))
}

pub fn curve_to_string(spline: &Spline) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# curve: open|closed, then knots");
    let _ = writeln!(s, "{}", if spline.closed { "closed" } else { "open" });
    for p in &spline.knots {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    s
}

pub fn curve_from_str(text: &str, path: &str) -> Result<Spline, IoError> {
    let mut lines = data_lines(text);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty curve file"))?;
    let closed = match header {
        "open" => false,
        "closed" => true,
        other => {
            return Err(parse_err(
                path,
                lineno,
                format!("expected `open` or `closed`, got `{other}`"),
            ))
        }
    };
    let mut knots = Vec::new();
    for (lineno, line) in lines {
        let xy: Vec<f64> = parse_fields(path, lineno, line, 2, "coordinate")?;
        knots.push(Point2::new(xy[0], xy[1]));
    }
    Spline::fit(&knots, closed).map_err(|e| parse_err(path, 0, format!("invalid curve: {e}")))
}

pub fn read_curve(path: impl AsRef<Path>) -> Result<Spline, IoError> {
    let path = path.as_ref();
    curve_from_str(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_curve(path: impl AsRef<Path>, spline: &Spline) -> Result<(), IoError> {
    write_string(path.as_ref(), &curve_to_string(spline))
}

pub fn crack_path_to_string(crack: &CrackPath) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# ell0={}", crack.ell0);
    let _ = writeln!(s, "# delta_ell={}", crack.delta_ell);
    let _ = writeln!(s, "# n_initial={}", crack.n_initial);
    for p in &crack.knots {
        let _ = writeln!(s, "{},{}", p.x, p.y);
    }
    s
}

pub fn crack_path_from_str(text: &str, path: &str) -> Result<CrackPath, IoError> {
    let mut delta_ell = None;
    let mut n_initial = None;
    let mut knots = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("delta_ell=") {
                delta_ell = Some(v.parse::<f64>().map_err(|_| {
                    parse_err(path, lineno, format!("bad delta_ell `{v}`"))
                })?);
            } else if let Some(v) = rest.strip_prefix("n_initial=") {
                n_initial = Some(v.parse::<usize>().map_err(|_| {
                    parse_err(path, lineno, format!("bad n_initial `{v}`"))
                })?);
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_err(path, lineno, "expected `x,y`"));
        }
        let x = fields[0].trim().parse::<f64>().map_err(|_| {
            parse_err(path, lineno, format!("bad coordinate `{}`", fields[0]))
        })?;
        let y = fields[1].trim().parse::<f64>().map_err(|_| {
            parse_err(path, lineno, format!("bad coordinate `{}`", fields[1]))
        })?;
        knots.push(Point2::new(x, y));
    }
    let delta_ell =
        delta_ell.ok_or_else(|| parse_err(path, 0, "missing `# delta_ell=` header"))?;
    let n_initial = n_initial.unwrap_or(knots.len());
    CrackPath::from_parts(knots, n_initial, delta_ell)
        .map_err(|e| parse_err(path, 0, format!("invalid crack path: {e}")))
}

pub fn read_crack_path(path: impl AsRef<Path>) -> Result<CrackPath, IoError> {
    let path = path.as_ref();
    crack_path_from_str(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_crack_path(path: impl AsRef<Path>, crack: &CrackPath) -> Result<(), IoError> {
    write_string(path.as_ref(), &crack_path_to_string(crack))
}

pub const RECORD_HEADER: &str = "step,ell,tip_x,tip_y,K_I,K_II,C,theta_k,min_quality";

pub fn records_to_string(records: &[PropagationRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{RECORD_HEADER}");
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.step, r.ell, r.tip_x, r.tip_y, r.k1, r.k2, r.load_factor, r.theta_k, r.min_quality
        );
    }
    s
}

pub fn records_from_str(text: &str, path: &str) -> Result<Vec<PropagationRecord>, IoError> {
    let mut lines = data_lines(text);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty record file"))?;
    if header != RECORD_HEADER {
        return Err(parse_err(path, lineno, "unexpected record header"));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 9 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 9 record fields, got {}", fields.len()),
            ));
        }
        let step = fields[0]
            .parse::<usize>()
            .map_err(|_| parse_err(path, lineno, format!("bad step `{}`", fields[0])))?;
        let mut vals = [0.0f64; 8];
        for (k, f) in fields[1..].iter().enumerate() {
            vals[k] = f
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad value `{f}`")))?;
        }
        records.push(PropagationRecord {
            step,
            ell: vals[0],
            tip_x: vals[1],
            tip_y: vals[2],
            k1: vals[3],
            k2: vals[4],
            load_factor: vals[5],
            theta_k: vals[6],
            min_quality: vals[7],
        });
    }
    Ok(records)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<PropagationRecord>, IoError> {
    let path = path.as_ref();
    records_from_str(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_records(
    path: impl AsRef<Path>,
    records: &[PropagationRecord],
) -> Result<(), IoError> {
    write_string(path.as_ref(), &records_to_string(records))
}

/// Legacy ASCII VTK unstructured grid with an optional per-vertex
/// displacement vector, one optional scalar field per vertex and one per
/// cell. Output only; readable by common visualization tools.
pub fn vtk_to_string(
    mesh: &Triangulation,
    displacement: Option<&[[f64; 2]]>,
    point_data: Option<(&str, &[f64])>,
    cell_data: Option<(&str, &[f64])>,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "unimesh output");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {} 0", p.x, p.y);
    }
    let nt = mesh.triangles.len();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "5");
    }
    if displacement.is_some() || point_data.is_some() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.vertices.len());
    }
    if let Some(values) = displacement {
        let _ = writeln!(s, "VECTORS displacement double");
        for v in values {
            let _ = writeln!(s, "{} {} 0", v[0], v[1]);
        }
    }
    if let Some((name, values)) = point_data {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v}");
        }
    }
    if let Some((name, values)) = cell_data {
        let _ = writeln!(s, "CELL_DATA {nt}");
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v}");
        }
    }
    s
}

pub fn write_vtk(
    path: impl AsRef<Path>,
    mesh: &Triangulation,
    displacement: Option<&[[f64; 2]]>,
    point_data: Option<(&str, &[f64])>,
    cell_data: Option<(&str, &[f64])>,
) -> Result<(), IoError> {
    write_string(
        path.as_ref(),
        &vtk_to_string(mesh, displacement, point_data, cell_data),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::structured_acute_mesh;

    #[test]
    fn mesh_round_trip_is_bit_exact() {
        let mesh = structured_acute_mesh(
            Point2::new(-1.0, 0.0),
            Point2::new(2.0, 1.0),
            7,
        )
        .unwrap();
        let text = mesh_to_string(&mesh);
        let back = mesh_from_str(&text, "test").unwrap();
        assert_eq!(mesh.vertices.len(), back.vertices.len());
        for (p, q) in mesh.vertices.iter().zip(&back.vertices) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        assert_eq!(mesh.triangles, back.triangles);
        // a second trip reproduces the text exactly
        assert_eq!(text, mesh_to_string(&back));
    }

    #[test]
    fn mesh_parse_errors_carry_line_numbers() {
        let text = "2 1\n0 0\n1 zz\n0 1 2\n";
        let err = mesh_from_str(text, "bad.mesh").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.mesh:3"), "{msg}");
        assert!(msg.contains("zz"), "{msg}");
    }

    #[test]
    fn curve_round_trip() {
        let knots = vec![
            Point2::new(0.1, 0.2),
            Point2::new(1.0 / 3.0, -0.7),
            Point2::new(2.5, 0.925),
        ];
        let spline = Spline::fit(&knots, false).unwrap();
        let text = curve_to_string(&spline);
        let back = curve_from_str(&text, "test").unwrap();
        assert!(!back.closed);
        for (p, q) in spline.knots.iter().zip(&back.knots) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
    }

    #[test]
    fn crack_path_round_trip_preserves_bookkeeping() {
        let base = CrackPath::new(
            vec![Point2::new(0.0, 0.0), Point2::new(0.5, 0.0), Point2::new(1.0, 0.0)],
            0.25,
        )
        .unwrap()
        .append_tip(Point2::new(1.25, 0.0))
        .unwrap();
        let dir = Point2::new(0.1f64.cos(), 0.1f64.sin());
        let crack = base.append_tip(base.tip().add(dir.scale(0.25))).unwrap();
        let text = crack_path_to_string(&crack);
        let back = crack_path_from_str(&text, "test").unwrap();
        assert_eq!(back.n_initial, 3);
        assert_eq!(back.knots.len(), crack.knots.len());
        assert_eq!(back.ell0.to_bits(), crack.ell0.to_bits());
        assert_eq!(back.delta_ell.to_bits(), crack.delta_ell.to_bits());
        assert!((back.ell - crack.ell).abs() < 1e-14);
    }

    #[test]
    fn records_round_trip_at_full_precision() {
        let records = vec![PropagationRecord {
            step: 3,
            ell: 1.0 / 3.0,
            tip_x: -2.0f64.sqrt(),
            tip_y: 1e-17,
            k1: 1.2345678901234567,
            k2: -9.876543210987654e-5,
            load_factor: 7.0 / 11.0,
            theta_k: -0.0123456789,
            min_quality: 0.62,
        }];
        let text = records_to_string(&records);
        let back = records_from_str(&text, "test").unwrap();
        assert_eq!(back.len(), 1);
        let (a, b) = (&records[0], &back[0]);
        assert_eq!(a.step, b.step);
        for (x, y) in [
            (a.ell, b.ell),
            (a.tip_x, b.tip_x),
            (a.tip_y, b.tip_y),
            (a.k1, b.k1),
            (a.k2, b.k2),
            (a.load_factor, b.load_factor),
            (a.theta_k, b.theta_k),
            (a.min_quality, b.min_quality),
        ] {
            assert_eq!(x.to_bits(), y.to_bits(), "{x} vs {y}");
        }
    }

    #[test]
    fn vtk_output_has_expected_structure() {
        let mesh = structured_acute_mesh(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            2,
        )
        .unwrap();
        let q: Vec<f64> = mesh.quality_report().per_triangle;
        let disp: Vec<[f64; 2]> = mesh.vertices.iter().map(|p| [p.x, -p.y]).collect();
        let text = vtk_to_string(&mesh, Some(&disp), None, Some(("quality", &q)));
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains(&format!("POINTS {} double", mesh.vertices.len())));
        assert!(text.contains(&format!("CELL_TYPES {}", mesh.triangles.len())));
        assert!(text.contains("VECTORS displacement double"));
        assert!(text.contains("SCALARS quality double 1"));
        let type_lines = text.lines().filter(|l| *l == "5").count();
        assert_eq!(type_lines, mesh.triangles.len());
    }
}
