use crate::error::{Result, VemError};
use crate::mesh::PolygonalMesh;
use crate::polyops::dim;

pub(crate) const FREE_NONE: usize = usize::MAX;

/// Global numbering. Velocity and phase DoFs are ordered vertices, then
/// edges, then cell interiors; pressure is cellwise. The unknown vector is
/// `[free velocity | pressure | multiplier | free phase]`.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_vel: usize,
    pub n_phase: usize,
    pub n_press: usize,
    pub press_per_cell: usize,
    pub vel_cell: Vec<Vec<usize>>,
    pub phase_cell: Vec<Vec<usize>>,
    pub vel_fixed: Vec<bool>,
    pub phase_fixed: Vec<bool>,
    pub vel_unknown: Vec<usize>,
    pub phase_unknown: Vec<usize>,
    pub press_offset: usize,
    pub mu_index: usize,
    pub phase_offset: usize,
    pub n_unknowns: usize,
    /// Edge `e` owns velocity DoFs `vel_edge_base + e * vel_edge_block ..`,
    /// normal values first. The phase edge blocks follow the same pattern.
    pub vel_edge_base: usize,
    pub vel_edge_block: usize,
    pub phase_edge_base: usize,
    pub phase_edge_block: usize,
}

impl DofMap {
    pub fn new(mesh: &PolygonalMesh, k: usize, l: usize) -> Result<Self> {
        let (nv, ne, nc) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_cells());
        let khat = k.max(2);
        let lhat = l.max(3);
        let vel_edge_block = (khat - 1) + (k - 1);
        let vel_cell_block = dim(k as i32 - 3) + dim(k as i32 - 1) - 1;
        let vel_edge_base = 2 * nv;
        let vel_cell_base = vel_edge_base + ne * vel_edge_block;
        let n_vel = vel_cell_base + nc * vel_cell_block;
        let phase_edge_block = (l - 2) + (lhat - 3);
        let phase_cell_block = dim(l as i32 - 4);
        let phase_edge_base = 3 * nv;
        let phase_cell_base = phase_edge_base + ne * phase_edge_block;
        let n_phase = phase_cell_base + nc * phase_cell_block;
        let press_per_cell = dim(k as i32 - 1);

        let mut vel_cell = Vec::with_capacity(nc);
        let mut phase_cell = Vec::with_capacity(nc);
        for c in 0..nc {
            let verts = &mesh.cells()[c];
            let mut v = Vec::new();
            let mut p = Vec::new();
            for &g in verts {
                v.extend([2 * g, 2 * g + 1]);
                p.extend([3 * g, 3 * g + 1, 3 * g + 2]);
            }
            for &e in mesh.cell_edges(c) {
                v.extend((0..vel_edge_block).map(|j| vel_edge_base + e * vel_edge_block + j));
                p.extend((0..phase_edge_block).map(|j| phase_edge_base + e * phase_edge_block + j));
            }
            v.extend((0..vel_cell_block).map(|j| vel_cell_base + c * vel_cell_block + j));
            p.extend((0..phase_cell_block).map(|j| phase_cell_base + c * phase_cell_block + j));
            vel_cell.push(v);
            phase_cell.push(p);
        }

        let mut vel_fixed = vec![false; n_vel];
        let mut phase_fixed = vec![false; n_phase];
        let tol = 1e-10;
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.right.is_some() {
                continue;
            }
            for v in [edge.a, edge.b] {
                vel_fixed[2 * v] = true;
                vel_fixed[2 * v + 1] = true;
            }
            for j in 0..vel_edge_block {
                vel_fixed[vel_edge_base + e * vel_edge_block + j] = true;
            }
            for j in 0..(l - 2) {
                phase_fixed[phase_edge_base + e * phase_edge_block + j] = true;
            }
            let n = mesh.edge_normal(e);
            let axis = if n.y.abs() < tol && (n.x.abs() - 1.0).abs() < tol {
                1
            } else if n.x.abs() < tol && (n.y.abs() - 1.0).abs() < tol {
                2
            } else {
                return Err(VemError::Unsupported(format!(
                    "boundary edge {e} is not axis-aligned; the phase Neumann constraints assume a rectangle"
                )));
            };
            for v in [edge.a, edge.b] {
                phase_fixed[3 * v + axis] = true;
            }
        }

        let mut next = 0;
        let vel_unknown: Vec<usize> = vel_fixed
            .iter()
            .map(|&f| {
                if f {
                    FREE_NONE
                } else {
                    next += 1;
                    next - 1
                }
            })
            .collect();
        let press_offset = next;
        let mu_index = press_offset + nc * press_per_cell;
        let phase_offset = mu_index + 1;
        let mut next = phase_offset;
        let phase_unknown: Vec<usize> = phase_fixed
            .iter()
            .map(|&f| {
                if f {
                    FREE_NONE
                } else {
                    next += 1;
                    next - 1
                }
            })
            .collect();
        Ok(Self {
            n_vel,
            n_phase,
            n_press: nc * press_per_cell,
            press_per_cell,
            vel_cell,
            phase_cell,
            vel_fixed,
            phase_fixed,
            vel_unknown,
            phase_unknown,
            press_offset,
            mu_index,
            phase_offset,
            n_unknowns: next,
            vel_edge_base,
            vel_edge_block,
            phase_edge_base,
            phase_edge_block,
        })
    }

    pub fn press_range(&self, c: usize) -> std::ops::Range<usize> {
        c * self.press_per_cell..(c + 1) * self.press_per_cell
    }
}
