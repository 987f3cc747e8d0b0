//! ASCII PLY subset: `x y z` with optional `nx ny nz` vertex properties.

use std::fmt::Write as _;

use super::{CloudError, PointCloud, Result};
use crate::geometry::{Point3, Vector3};

const PROPS: [&str; 6] = ["x", "y", "z", "nx", "ny", "nz"];

fn err(line: usize, msg: impl Into<String>) -> CloudError {
    CloudError::Ply { line, msg: msg.into() }
}

pub fn read_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")));

    let (n, l) = next("magic")?;
    if l != "ply" {
        return Err(err(n, "missing 'ply' magic"));
    }
    let mut frame = String::new();
    let mut count: Option<usize> = None;
    let mut props: Vec<&str> = Vec::new();
    let mut format_seen = false;
    loop {
        let (n, l) = next("end_header")?;
        let mut words = l.split_whitespace();
        match words.next() {
            Some("format") => {
                let f = words.next().unwrap_or("");
                if f != "ascii" {
                    return Err(err(n, format!("unsupported format '{f}', only ascii is read")));
                }
                format_seen = true;
            }
            Some("comment") => {
                if words.next() == Some("frame") {
                    frame = words.collect::<Vec<_>>().join(" ");
                }
            }
            Some("element") => {
                let name = words.next().unwrap_or("");
                if name != "vertex" || count.is_some() {
                    return Err(err(n, format!("unsupported element '{name}'")));
                }
                let c = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| err(n, "bad vertex count"))?;
                count = Some(c);
            }
            Some("property") => {
                if count.is_none() {
                    return Err(err(n, "property before element"));
                }
                let ty = words.next().unwrap_or("");
                let name = words.next().unwrap_or("");
                if !matches!(ty, "float" | "float32" | "double" | "float64") {
                    return Err(err(n, format!("unsupported property type '{ty}'")));
                }
                if props.len() >= PROPS.len() || PROPS[props.len()] != name {
                    return Err(err(n, format!("unknown or out-of-order property '{name}'")));
                }
                props.push(name);
            }
            Some("end_header") => break,
            _ => return Err(err(n, format!("unexpected header line '{l}'"))),
        }
    }
    if !format_seen {
        return Err(err(0, "missing format line"));
    }
    let count = count.ok_or_else(|| err(0, "missing vertex element"))?;
    if props.len() != 3 && props.len() != 6 {
        return Err(err(0, "expected properties x y z [nx ny nz]"));
    }
    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::new();
    for _ in 0..count {
        let (n, l) = next("vertex")?;
        let vals = l
            .split_whitespace()
            .map(|w| w.parse::<f64>().map_err(|_| err(n, format!("bad number '{w}'"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != props.len() {
            return Err(err(n, format!("expected {} values, found {}", props.len(), vals.len())));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(err(n, "non-finite value"));
        }
        points.push(Point3::new(vals[0], vals[1], vals[2]));
        if vals.len() == 6 {
            let nv = Vector3::new(vals[3], vals[4], vals[5]);
            let len = nv.norm();
            if !(len > 0.0) {
                return Err(err(n, "zero normal"));
            }
            normals.push(nv / len);
        }
    }
    let cloud = PointCloud::new(points, frame)?;
    if props.len() == 6 {
        cloud.with_normals(normals)
    } else {
        Ok(cloud)
    }
}

pub fn write_ply(cloud: &PointCloud) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    if !cloud.frame.is_empty() {
        let _ = writeln!(s, "comment frame {}", cloud.frame);
    }
    let _ = writeln!(s, "element vertex {}", cloud.len());
    let nprops = if cloud.normals().is_some() { 6 } else { 3 };
    for p in &PROPS[..nprops] {
        let _ = writeln!(s, "property float {p}");
    }
    s.push_str("end_header\n");
    for (i, p) in cloud.points().iter().enumerate() {
        let _ = write!(s, "{} {} {}", p.x, p.y, p.z);
        if let Some(n) = cloud.normals() {
            let _ = write!(s, " {} {} {}", n[i].x, n[i].y, n[i].z);
        }
        s.push('\n');
    }
    s
}
