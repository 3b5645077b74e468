use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor-product partition of `[0, L] × [-Vc, Vc]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub nx: usize,
    pub nv: usize,
    pub length: f64,
    pub vc: f64,
    pub dx: f64,
    pub dv: f64,
    pub x_edges: Vec<f64>,
    pub v_edges: Vec<f64>,
    pub x_centers: Vec<f64>,
    pub v_centers: Vec<f64>,
}

pub fn build_mesh(nx: usize, nv: usize, length: f64, vc: f64) -> Result<Mesh> {
    if nx < 1 {
        return Err(Error::InvalidMesh(format!("nx must be >= 1, got {nx}")));
    }
    if nv < 2 || nv % 2 != 0 {
        return Err(Error::InvalidMesh(format!(
            "nv must be even and >= 2, got {nv}"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidMesh(format!("length must be positive, got {length}")));
    }
    if !(vc > 0.0 && vc.is_finite()) {
        return Err(Error::InvalidMesh(format!("vc must be positive, got {vc}")));
    }
    let dx = length / nx as f64;
    let dv = 2.0 * vc / nv as f64;

    let mut x_edges: Vec<f64> = (0..=nx).map(|i| i as f64 * dx).collect();
    x_edges[nx] = length;
    let mut v_edges: Vec<f64> = (0..=nv).map(|j| -vc + j as f64 * dv).collect();
    v_edges[nv] = vc;
    v_edges[nv / 2] = 0.0;

    let x_centers = (0..nx).map(|i| (i as f64 + 0.5) * dx).collect();
    // (j - (Nv+1)/2)·dv with 1-based j, written in a form symmetric about zero
    let v_centers = (0..nv)
        .map(|j| (2.0 * j as f64 + 1.0 - nv as f64) * 0.5 * dv)
        .collect();

    Ok(Mesh {
        nx,
        nv,
        length,
        vc,
        dx,
        dv,
        x_edges,
        v_edges,
        x_centers,
        v_centers,
    })
}

impl Mesh {
    pub fn num_cells(&self) -> usize {
        self.nx * self.nv
    }

    /// Signed odd index `m = 2j - Nv - 1` (1-based j) of velocity row `j` (0-based).
    pub fn velocity_mode_index(&self, j: usize) -> i64 {
        2 * j as i64 + 1 - self.nv as i64
    }

    /// Cell owning `x`; a cell owns its upper edge, `x = 0` belongs to the first cell.
    pub fn x_cell(&self, x: f64) -> Option<usize> {
        locate(x, 0.0, self.length, self.dx, self.nx)
    }

    pub fn v_cell(&self, v: f64) -> Option<usize> {
        locate(v, -self.vc, self.vc, self.dv, self.nv)
    }

    /// Reference coordinate in `[-1/2, 1/2]` of `x` relative to cell `i`.
    pub fn x_ref(&self, i: usize, x: f64) -> f64 {
        (x - self.x_centers[i]) / self.dx
    }

    pub fn v_ref(&self, j: usize, v: f64) -> f64 {
        (v - self.v_centers[j]) / self.dv
    }
}

fn locate(p: f64, lo: f64, hi: f64, h: f64, n: usize) -> Option<usize> {
    if !(p >= lo && p <= hi) {
        return None;
    }
    let s = (p - lo) / h;
    let mut idx = s.ceil() as usize;
    idx = idx.saturating_sub(1);
    Some(idx.min(n - 1))
}
