use std::collections::{BTreeMap, HashSet};

use super::{dist, Mesh};
use crate::error::{Error, Result};

/// Cuts a slit along `p0 → p1` by duplicating the nodes on the segment.
///
/// Cells on the left of the segment direction receive the copies. Endpoints
/// that lie inside the domain (crack tips) are not duplicated.
pub fn cut_notch(mesh: &Mesh, p0: [f64; 2], p1: [f64; 2]) -> Result<Mesh> {
    let len = dist(p0, p1);
    let scale = mesh.nodes.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1.0);
    let tol = 1e-9 * scale;
    if len <= tol {
        return Ok(mesh.clone());
    }
    let d = [(p1[0] - p0[0]) / len, (p1[1] - p0[1]) / len];
    let normal = [-d[1], d[0]];

    let mut on_seg: Vec<(f64, usize)> = mesh
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let r = [p[0] - p0[0], p[1] - p0[1]];
            let t = r[0] * d[0] + r[1] * d[1];
            let off = r[0] * normal[0] + r[1] * normal[1];
            (off.abs() <= tol && t >= -tol && t <= len + tol).then_some((t, i))
        })
        .collect();
    on_seg.sort_by(|a, b| a.0.total_cmp(&b.0));
    let used: HashSet<usize> = mesh.cells.iter().flat_map(|c| c.nodes().to_vec()).collect();
    on_seg.retain(|(_, i)| used.contains(i));

    let starts = on_seg.first().is_some_and(|(t, _)| t.abs() <= tol);
    let ends = on_seg.last().is_some_and(|(t, _)| (t - len).abs() <= tol);
    if !starts || !ends {
        return Err(Error::Mesh(format!("notch {p0:?} -> {p1:?}: endpoints are not mesh nodes")));
    }
    for w in on_seg.windows(2) {
        if !mesh.is_cell_edge([w[0].1, w[1].1]) {
            return Err(Error::Mesh(format!(
                "notch {p0:?} -> {p1:?} does not follow element edges between nodes {} and {}",
                w[0].1, w[1].1
            )));
        }
    }

    let boundary = mesh.boundary_nodes();
    let last = on_seg.len() - 1;
    let dup: Vec<usize> = on_seg
        .iter()
        .enumerate()
        .filter(|&(k, (_, n))| (k != 0 && k != last) || boundary.contains(n))
        .map(|(_, &(_, n))| n)
        .collect();

    let mut out = mesh.clone();
    let mut copy_of = BTreeMap::new();
    for &n in &dup {
        out.nodes.push(mesh.nodes[n]);
        copy_of.insert(n, out.nodes.len() - 1);
    }
    for (c, cell) in out.cells.iter_mut().enumerate() {
        let cen = mesh.centroid(c);
        let side = (cen[0] - p0[0]) * normal[0] + (cen[1] - p0[1]) * normal[1];
        if side > 0.0 {
            for n in cell.nodes_mut() {
                if let Some(&copy) = copy_of.get(n) {
                    *n = copy;
                }
            }
        }
    }
    for ids in out.node_sets.values_mut() {
        let extra: Vec<usize> = ids.iter().filter_map(|n| copy_of.get(n).copied()).collect();
        ids.extend(extra);
    }
    let edge_sets = std::mem::take(&mut out.edge_sets);
    for (name, edges) in edge_sets {
        let mut fixed = Vec::with_capacity(edges.len());
        for [a, b] in edges {
            let va = [Some(a), copy_of.get(&a).copied()];
            let vb = [Some(b), copy_of.get(&b).copied()];
            for x in va.into_iter().flatten() {
                for y in vb.into_iter().flatten() {
                    if out.is_cell_edge([x, y]) {
                        fixed.push([x, y]);
                    }
                }
            }
        }
        out.edge_sets.insert(name, fixed);
    }
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_rect_mesh;

    #[test]
    fn sent_like_cut() {
        let m = generate_rect_mesh(1.0, 1.0, 0.125, &[]).unwrap();
        let cut = cut_notch(&m, [0.0, 0.5], [0.5, 0.5]).unwrap();
        // nodes at x = 0, 0.125, .., 0.375 are copied; the tip at 0.5 is not
        assert_eq!(cut.node_count(), m.node_count() + 4);
        assert_eq!(cut.euler_characteristic(), 1);
        assert_eq!(cut.boundary_edges().len(), m.boundary_edges().len() + 8);
        assert_eq!(cut.node_set("left").unwrap().len(), m.node_set("left").unwrap().len() + 1);
        assert_eq!(cut.edge_set("left").unwrap().len(), 8);
    }

    #[test]
    fn zero_length_is_identity() {
        let m = generate_rect_mesh(1.0, 1.0, 0.25, &[]).unwrap();
        assert_eq!(cut_notch(&m, [0.5, 0.5], [0.5, 0.5]).unwrap(), m);
    }

    #[test]
    fn off_grid_segment_rejected() {
        let m = generate_rect_mesh(1.0, 1.0, 0.25, &[]).unwrap();
        assert!(cut_notch(&m, [0.0, 0.4], [0.5, 0.4]).is_err());
    }
}
