//! Triangle-style mesh export: a `.node` file with vertex coordinates and
//! markers, and a `.ele` file with triangle connectivity and region tags.
//! Indices are 1-based, fields whitespace-separated, lines LF-terminated.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::geometry::RegionId;
use crate::meshgen::{Mesh, VertexMarker};

fn marker_code(m: VertexMarker) -> u8 {
    match m {
        VertexMarker::Interior => 0,
        VertexMarker::Boundary => 1,
        VertexMarker::Interface => 2,
    }
}

fn region_code(r: RegionId) -> u8 {
    match r {
        RegionId::Region1 => 1,
        RegionId::Region2 => 2,
    }
}

pub fn node_file_contents(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", mesh.n_vertices());
    for (i, (v, m)) in mesh.vertices.iter().zip(&mesh.vertex_marker).enumerate() {
        let _ = writeln!(out, "{} {} {} {}", i + 1, v.x, v.y, marker_code(*m));
    }
    out
}

pub fn ele_file_contents(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            t + 1,
            tri[0] + 1,
            tri[1] + 1,
            tri[2] + 1,
            region_code(mesh.tri_region[t])
        );
    }
    out
}

/// Writes `<stem>.node` and `<stem>.ele` next to each other.
pub fn write_mesh_files(mesh: &Mesh, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.node")), node_file_contents(mesh))?;
    std::fs::write(dir.join(format!("{stem}.ele")), ele_file_contents(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, InterfaceCurve, Point2};
    use crate::meshgen::build_disk_polar_mesh;

    fn sample_mesh() -> Mesh {
        let curve = InterfaceCurve::circle(Point2::new(0.0, 0.0), 0.5).unwrap();
        let domain = DomainSpec::disk(Point2::new(0.0, 0.0), 1.0, curve).unwrap();
        build_disk_polar_mesh(&domain, 0.5).unwrap()
    }

    #[test]
    fn node_file_layout() {
        let mesh = sample_mesh();
        let text = node_file_contents(&mesh);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], mesh.n_vertices().to_string());
        assert_eq!(lines.len(), mesh.n_vertices() + 1);
        // first vertex is the disk center: interior marker, index 1
        let first: Vec<&str> = lines[1].split_whitespace().collect();
        assert_eq!(first, vec!["1", "0", "0", "0"]);
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        // all three marker codes appear in a fitted disk mesh
        for code in ["0", "1", "2"] {
            assert!(lines[1..]
                .iter()
                .any(|l| l.split_whitespace().nth(3) == Some(code)));
        }
    }

    #[test]
    fn ele_file_layout() {
        let mesh = sample_mesh();
        let text = ele_file_contents(&mesh);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], mesh.n_triangles().to_string());
        assert_eq!(lines.len(), mesh.n_triangles() + 1);
        for (t, line) in lines[1..].iter().enumerate() {
            let fields: Vec<usize> = line
                .split_whitespace()
                .map(|f| f.parse().unwrap())
                .collect();
            assert_eq!(fields.len(), 5);
            assert_eq!(fields[0], t + 1);
            for &v in &fields[1..4] {
                assert!(v >= 1 && v <= mesh.n_vertices());
            }
            assert!(fields[4] == 1 || fields[4] == 2);
        }
        // both regions present
        assert!(lines[1..].iter().any(|l| l.ends_with(" 1")));
        assert!(lines[1..].iter().any(|l| l.ends_with(" 2")));
    }

    #[test]
    fn files_written_to_disk() {
        let mesh = sample_mesh();
        let dir = std::env::temp_dir().join("ifem_mesh_io_test");
        write_mesh_files(&mesh, &dir, "disk").unwrap();
        let node = std::fs::read_to_string(dir.join("disk.node")).unwrap();
        let ele = std::fs::read_to_string(dir.join("disk.ele")).unwrap();
        assert_eq!(node, node_file_contents(&mesh));
        assert_eq!(ele, ele_file_contents(&mesh));
        std::fs::remove_dir_all(&dir).ok();
    }
}
