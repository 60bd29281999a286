//! Per-triangle energy of an eigenfunction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyVariant {
    /// `|∇u|²·area`; sums to `uᵀKu`.
    Gradient,
    /// Sum over the three edges of `(∇u·n̂)²·length`.
    EdgeNormal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyField {
    pub values: Vec<f64>,
    pub variant: EnergyVariant,
}

impl EnergyField {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn gradient(p: [[f64; 2]; 3], u: [f64; 3]) -> ([f64; 2], f64) {
    let area = crate::mesh::signed_area(p);
    let mut g = [0.0; 2];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[0] += u[i] * (p[j][1] - p[k][1]);
        g[1] += u[i] * (p[k][0] - p[j][0]);
    }
    ([g[0] / (2.0 * area), g[1] / (2.0 * area)], area)
}

/// Energy of the P1 function `u` (one value per vertex) on each triangle.
pub fn energy_distribution(mesh: &TriMesh, u: &[f64], variant: EnergyVariant) -> EnergyField {
    assert_eq!(u.len(), mesh.num_vertices(), "field must have one value per vertex");
    let values = mesh
        .triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let p = mesh.corners(t);
            let (g, area) = gradient(p, [u[tri[0]], u[tri[1]], u[tri[2]]]);
            match variant {
                EnergyVariant::Gradient => (g[0] * g[0] + g[1] * g[1]) * area,
                EnergyVariant::EdgeNormal => (0..3)
                    .map(|i| {
                        let (a, b) = (p[i], p[(i + 1) % 3]);
                        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                        let len = dx.hypot(dy);
                        let dn = (g[0] * dy - g[1] * dx) / len;
                        dn * dn * len
                    })
                    .sum(),
            }
        })
        .collect();
    EnergyField { values, variant }
}

/// Cellwise `wa·a + wb·b`.
pub fn energy_combination(a: &EnergyField, b: &EnergyField, weights: (f64, f64)) -> Result<EnergyField> {
    if a.values.len() != b.values.len() {
        return Err(Error::invalid(format!(
            "energy fields live on different meshes ({} vs {} cells)",
            a.values.len(),
            b.values.len()
        )));
    }
    if a.variant != b.variant {
        return Err(Error::invalid("cannot combine energy fields of different variants"));
    }
    Ok(EnergyField {
        values: a.values.iter().zip(&b.values).map(|(x, y)| weights.0 * x + weights.1 * y).collect(),
        variant: a.variant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;

    #[test]
    fn constant_field_has_no_energy() {
        let mesh = TriMesh::unit_square(4);
        let u = vec![3.0; mesh.num_vertices()];
        for v in [EnergyVariant::Gradient, EnergyVariant::EdgeNormal] {
            assert!(energy_distribution(&mesh, &u, v).values.iter().all(|&e| e.abs() < 1e-20));
        }
    }

    #[test]
    fn gradient_energy_sums_to_quadratic_form() {
        let mesh = TriMesh::unit_square(6);
        let (k, _) = assemble(&mesh).unwrap();
        let u: Vec<f64> = mesh.vertices.iter().map(|p| (3.0 * p[0]).sin() * p[1] * p[1]).collect();
        let e = energy_distribution(&mesh, &u, EnergyVariant::Gradient);
        assert!((e.total() - k.bilinear(&u, &u)).abs() < 1e-10);
    }

    #[test]
    fn edge_normal_of_linear_field() {
        // u = x on the unit right triangle: edges have normals (0,-1), (1,1)/√2, (-1,0)
        let mesh = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], 1.0);
        let e = energy_distribution(&mesh, &[0.0, 1.0, 0.0], EnergyVariant::EdgeNormal);
        let want = 0.0 + 0.5 * 2f64.sqrt() + 1.0;
        assert!((e.values[0] - want).abs() < 1e-14);
    }

    #[test]
    fn combination_weights() {
        let a = EnergyField { values: vec![1.0, 2.0], variant: EnergyVariant::Gradient };
        let b = EnergyField { values: vec![5.0, 7.0], variant: EnergyVariant::Gradient };
        assert_eq!(energy_combination(&a, &b, (1.0, 0.0)).unwrap(), a);
        assert_eq!(energy_combination(&a, &a, (0.5, 0.5)).unwrap(), a);
        let short = EnergyField { values: vec![1.0], variant: EnergyVariant::Gradient };
        assert!(energy_combination(&a, &short, (1.0, 1.0)).is_err());
    }
}
