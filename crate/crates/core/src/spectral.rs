//! Cosine pseudo-spectral differentiation on the two grid families.
//!
//! Both families diagonalize their second-derivative matrix in an orthonormal
//! cosine basis; mode `m` on an axis of extent `L` carries the eigenvalue
//! `-(m pi / L)^2`.
//!
//! * Mid-point nodes: forward transform = orthonormal DCT-2, inverse =
//!   orthonormal DCT-3.
//! * Regular (vertex) nodes: the orthonormal symmetric DCT-1 conjugated with
//!   the diagonal scaling `T = diag(sqrt(a_j))`, where `a_j = 2` at the two
//!   boundary nodes and 1 inside. The scaled transform is its own inverse.
//!
//! The raw DCT kernels come from `rustdct`; everything here only adds the
//! orthonormal scalings. The test suite checks the whole FFT-backed path
//! against dense transform matrices built entry by entry.

use std::sync::Arc;

use rustdct::{Dct1, DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::grid::{Field, GridFamily, GridSpec};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

enum Kind {
    Mid {
        dct: Arc<dyn TransformType2And3<f64>>,
        fwd_scale: Vec<f64>,
        inv_scale: Vec<f64>,
    },
    Regular {
        dct: Arc<dyn Dct1<f64>>,
        post: Vec<f64>,
    },
}

/// Precomputed 1-D transform for one axis: FFT plan, orthonormal scalings and
/// the eigenvalues of the second-derivative matrix. Immutable and shareable.
pub struct TransformPlan {
    family: GridFamily,
    len: usize,
    eigenvalues: Vec<f64>,
    kind: Kind,
}

impl TransformPlan {
    /// Plan for an axis with `cells` cells spanning `extent`.
    pub fn new(
        family: GridFamily,
        cells: usize,
        extent: f64,
        planner: &mut DctPlanner<f64>,
    ) -> TransformPlan {
        assert!(cells > 0 && extent > 0.0);
        let n = cells as f64;
        let mu = std::f64::consts::PI / extent;
        let (len, kind) = match family {
            GridFamily::MidPoint => {
                let mut fwd = vec![(2.0 / n).sqrt(); cells];
                let mut inv = vec![(2.0 / n).sqrt(); cells];
                fwd[0] = (1.0 / n).sqrt();
                inv[0] = 2.0 / n.sqrt();
                (
                    cells,
                    Kind::Mid {
                        dct: planner.plan_dct2(cells),
                        fwd_scale: fwd,
                        inv_scale: inv,
                    },
                )
            }
            GridFamily::Regular => {
                let mut post = vec![(2.0 / n).sqrt(); cells + 1];
                post[0] = (1.0 / n).sqrt();
                post[cells] = (1.0 / n).sqrt();
                (
                    cells + 1,
                    Kind::Regular {
                        dct: planner.plan_dct1(cells + 1),
                        post,
                    },
                )
            }
        };
        let eigenvalues = (0..len).map(|m| -(m as f64 * mu).powi(2)).collect();
        TransformPlan {
            family,
            len,
            eigenvalues,
            kind,
        }
    }

    /// Convenience constructor for one axis of a grid.
    pub fn for_axis(grid: &GridSpec, axis: Axis) -> TransformPlan {
        let mut planner = DctPlanner::new();
        let (cells, extent) = match axis {
            Axis::X => (grid.nx(), grid.domain().extent_x()),
            Axis::Y => (grid.ny(), grid.domain().extent_y()),
        };
        TransformPlan::new(grid.family(), cells, extent, &mut planner)
    }

    pub fn family(&self) -> GridFamily {
        self.family
    }

    /// Node count along the axis (= transform length).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `lambda_m = -(m pi / extent)^2` for `m = 0..len`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub(crate) fn scratch_len(&self) -> usize {
        match &self.kind {
            Kind::Mid { dct, .. } => dct.get_scratch_len(),
            Kind::Regular { dct, .. } => dct.get_scratch_len(),
        }
    }

    /// Nodal values -> spectral coefficients, in place.
    pub(crate) fn forward_lane(&self, lane: &mut [f64], scratch: &mut [f64]) {
        debug_assert_eq!(lane.len(), self.len);
        match &self.kind {
            Kind::Mid { dct, fwd_scale, .. } => {
                if self.len == 1 {
                    return; // single node: the transform is the 1x1 identity
                }
                dct.process_dct2_with_scratch(lane, scratch);
                for (v, s) in lane.iter_mut().zip(fwd_scale) {
                    *v *= s;
                }
            }
            Kind::Regular { dct, post } => {
                lane[0] *= std::f64::consts::SQRT_2;
                lane[self.len - 1] *= std::f64::consts::SQRT_2;
                dct.process_dct1_with_scratch(lane, scratch);
                for (v, s) in lane.iter_mut().zip(post) {
                    *v *= s;
                }
            }
        }
    }

    /// Spectral coefficients -> nodal values, in place.
    pub(crate) fn inverse_lane(&self, lane: &mut [f64], scratch: &mut [f64]) {
        debug_assert_eq!(lane.len(), self.len);
        match &self.kind {
            Kind::Mid { dct, inv_scale, .. } => {
                if self.len == 1 {
                    return;
                }
                for (v, s) in lane.iter_mut().zip(inv_scale) {
                    *v *= s;
                }
                dct.process_dct3_with_scratch(lane, scratch);
            }
            // the scaled DCT-1 is an involution
            Kind::Regular { .. } => self.forward_lane(lane, scratch),
        }
    }
}

/// Orthonormal mid-point forward transform (DCT-2) of one lane.
pub fn dct_mid_forward(plan: &TransformPlan, values: &[f64]) -> Result<Vec<f64>> {
    lane_op(plan, values, GridFamily::MidPoint, true)
}

/// Orthonormal mid-point inverse transform (DCT-3) of one lane.
pub fn dct_mid_inverse(plan: &TransformPlan, coeffs: &[f64]) -> Result<Vec<f64>> {
    lane_op(plan, coeffs, GridFamily::MidPoint, false)
}

/// Orthonormal regular-grid transform (scaled DCT-1, self-inverse).
pub fn dct_reg_forward(plan: &TransformPlan, values: &[f64]) -> Result<Vec<f64>> {
    lane_op(plan, values, GridFamily::Regular, true)
}

fn lane_op(
    plan: &TransformPlan,
    values: &[f64],
    family: GridFamily,
    forward: bool,
) -> Result<Vec<f64>> {
    if plan.family != family {
        return Err(Error::InvalidArgument(format!(
            "plan is for the {} family",
            plan.family.label()
        )));
    }
    if values.len() != plan.len {
        return Err(Error::LaneLength {
            expected: plan.len,
            got: values.len(),
        });
    }
    let mut lane = values.to_vec();
    let mut scratch = vec![0.0; plan.scratch_len()];
    if forward {
        plan.forward_lane(&mut lane, &mut scratch);
    } else {
        plan.inverse_lane(&mut lane, &mut scratch);
    }
    Ok(lane)
}

/// 2-D spectral operators for one grid: Laplacian and Helmholtz solves.
/// Plans are built once per grid and shared freely across threads.
pub struct SpectralOps {
    grid: Arc<GridSpec>,
    plan_x: TransformPlan,
    plan_y: TransformPlan,
    // 1/sqrt(a_j) per axis for the regular family's T-scaling; None on mid.
    tinv_x: Option<Vec<f64>>,
    tinv_y: Option<Vec<f64>>,
}

fn tinv(nodes: usize, family: GridFamily) -> Option<Vec<f64>> {
    match family {
        GridFamily::MidPoint => None,
        GridFamily::Regular => {
            let mut v = vec![1.0; nodes];
            v[0] = std::f64::consts::FRAC_1_SQRT_2;
            v[nodes - 1] = std::f64::consts::FRAC_1_SQRT_2;
            Some(v)
        }
    }
}

impl SpectralOps {
    pub fn new(grid: &Arc<GridSpec>) -> SpectralOps {
        let mut planner = DctPlanner::new();
        let dom = grid.domain();
        let plan_x = TransformPlan::new(grid.family(), grid.nx(), dom.extent_x(), &mut planner);
        let plan_y = TransformPlan::new(grid.family(), grid.ny(), dom.extent_y(), &mut planner);
        SpectralOps {
            grid: Arc::clone(grid),
            tinv_x: tinv(plan_x.len(), grid.family()),
            tinv_y: tinv(plan_y.len(), grid.family()),
            plan_x,
            plan_y,
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn plan_x(&self) -> &TransformPlan {
        &self.plan_x
    }

    pub fn plan_y(&self) -> &TransformPlan {
        &self.plan_y
    }

    /// Discrete Laplacian `D2x u + u D2y^T`.
    pub fn laplacian(&self, u: &Field) -> Result<Field> {
        self.apply_symbol(u, |lam| lam)
    }

    /// Solve `(I - c Lap) w = rhs` for `w`; requires `c > 0`.
    pub fn helmholtz_solve(&self, rhs: &Field, c: f64) -> Result<Field> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "helmholtz shift must be positive and finite, got {c}"
            )));
        }
        // eigenvalues are <= 0, so the denominator stays >= 1
        self.apply_symbol(rhs, |lam| 1.0 / (1.0 - c * lam))
    }

    /// Transform, multiply each mode by `sym(lambda_x + lambda_y)`, transform
    /// back. All production operators are instances of this.
    fn apply_symbol(&self, u: &Field, sym: impl Fn(f64) -> f64 + Sync) -> Result<Field> {
        if !GridSpec::same(u.grid(), &self.grid) {
            return Err(Error::GridMismatch);
        }
        let ncx = self.plan_x.len();
        let ncy = self.plan_y.len();
        let mut buf = u.data().to_vec();

        // T^{-1} scaling (regular family only)
        if let (Some(sx), Some(sy)) = (&self.tinv_x, &self.tinv_y) {
            for i in 0..ncx {
                let row = &mut buf[i * ncy..(i + 1) * ncy];
                for (v, s) in row.iter_mut().zip(sy) {
                    *v *= sx[i] * s;
                }
            }
        }

        // forward along y (contiguous rows), then along x in transposed layout
        let scratch_y = self.plan_y.scratch_len();
        par::for_each_lane_mut(
            &mut buf,
            ncy,
            || vec![0.0; scratch_y],
            |scratch, lane| self.plan_y.forward_lane(lane, scratch),
        );
        let mut tbuf = vec![0.0; buf.len()];
        transpose_into(&buf, ncx, ncy, &mut tbuf);
        let scratch_x = self.plan_x.scratch_len();
        par::for_each_lane_mut(
            &mut tbuf,
            ncx,
            || vec![0.0; scratch_x],
            |scratch, lane| self.plan_x.forward_lane(lane, scratch),
        );

        let lx = self.plan_x.eigenvalues();
        let ly = self.plan_y.eigenvalues();
        for k in 0..ncy {
            let row = &mut tbuf[k * ncx..(k + 1) * ncx];
            for (i, v) in row.iter_mut().enumerate() {
                *v *= sym(lx[i] + ly[k]);
            }
        }

        par::for_each_lane_mut(
            &mut tbuf,
            ncx,
            || vec![0.0; scratch_x],
            |scratch, lane| self.plan_x.inverse_lane(lane, scratch),
        );
        transpose_into(&tbuf, ncy, ncx, &mut buf);
        par::for_each_lane_mut(
            &mut buf,
            ncy,
            || vec![0.0; scratch_y],
            |scratch, lane| self.plan_y.inverse_lane(lane, scratch),
        );

        // T scaling back
        if let (Some(sx), Some(sy)) = (&self.tinv_x, &self.tinv_y) {
            for i in 0..ncx {
                let row = &mut buf[i * ncy..(i + 1) * ncy];
                for (v, s) in row.iter_mut().zip(sy) {
                    *v /= sx[i] * s;
                }
            }
        }

        Field::from_data(&self.grid, buf)
    }
}

fn transpose_into(src: &[f64], rows: usize, cols: usize, dst: &mut [f64]) {
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Dense second-derivative matrix along one axis, assembled from the
/// orthonormal basis entry by entry. Test oracle only; O(n^3) assembly,
/// guarded to small axes.
pub fn dense_diff_matrix(grid: &GridSpec, axis: Axis) -> Result<Vec<Vec<f64>>> {
    let (cells, extent) = match axis {
        Axis::X => (grid.nx(), grid.domain().extent_x()),
        Axis::Y => (grid.ny(), grid.domain().extent_y()),
    };
    if cells > 64 {
        return Err(Error::InvalidArgument(format!(
            "dense_diff_matrix is a test oracle, axis limited to 64 cells (got {cells})"
        )));
    }
    let n = cells as f64;
    let mu = std::f64::consts::PI / extent;
    let pi = std::f64::consts::PI;
    match grid.family() {
        GridFamily::MidPoint => {
            // D = C diag(lambda) C^T with C[j][m] = sqrt(2/(N a_m)) cos(m (j+1/2) pi / N)
            let len = cells;
            let a = |m: usize| if m == 0 { 2.0 } else { 1.0 };
            let c = |j: usize, m: usize| {
                (2.0 / (n * a(m))).sqrt() * ((m as f64) * (j as f64 + 0.5) * pi / n).cos()
            };
            let mut d = vec![vec![0.0; len]; len];
            for j in 0..len {
                for m in 0..len {
                    let mut s = 0.0;
                    for p in 0..len {
                        let lam = -((p as f64) * mu).powi(2);
                        s += c(j, p) * lam * c(m, p);
                    }
                    d[j][m] = s;
                }
            }
            Ok(d)
        }
        GridFamily::Regular => {
            // D = T C diag(lambda) C T^{-1} with T = diag(sqrt(a_j)) and
            // C[j][m] = sqrt(2/(N a_j a_m)) cos(j m pi / N)
            let len = cells + 1;
            let a = |m: usize| if m == 0 || m == cells { 2.0 } else { 1.0 };
            let c = |j: usize, m: usize| {
                (2.0 / (n * a(j) * a(m))).sqrt() * ((j as f64) * (m as f64) * pi / n).cos()
            };
            let mut d = vec![vec![0.0; len]; len];
            for j in 0..len {
                for m in 0..len {
                    let mut s = 0.0;
                    for p in 0..len {
                        let lam = -((p as f64) * mu).powi(2);
                        s += c(j, p) * lam * c(m, p);
                    }
                    d[j][m] = s * (a(j) / a(m)).sqrt();
                }
            }
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn grid(family: GridFamily, nx: usize, ny: usize) -> Arc<GridSpec> {
        GridSpec::new(Domain::new(0.0, 1.0, 0.0, 1.0).unwrap(), family, nx, ny).unwrap()
    }

    #[test]
    fn mid_forward_of_ones() {
        let plan = TransformPlan::for_axis(&grid(GridFamily::MidPoint, 4, 1), Axis::X);
        let k = dct_mid_forward(&plan, &[1.0; 4]).unwrap();
        assert!((k[0] - 2.0).abs() < 1e-14);
        for v in &k[1..] {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn mid_inverse_of_unit_mode() {
        // coefficient 1 on mode m=1 must reproduce sqrt(2/N) cos(mu (x_j - a))
        let g = grid(GridFamily::MidPoint, 4, 1);
        let plan = TransformPlan::for_axis(&g, Axis::X);
        let x = dct_mid_inverse(&plan, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let mu = std::f64::consts::PI;
        for (j, v) in x.iter().enumerate() {
            let want = (2.0_f64 / 4.0).sqrt() * (mu * g.nodes_x()[j]).cos();
            assert!((v - want).abs() < 1e-14, "node {j}: {v} vs {want}");
        }
    }

    #[test]
    fn mid_round_trip() {
        let g = grid(GridFamily::MidPoint, 12, 1);
        let plan = TransformPlan::for_axis(&g, Axis::X);
        let vals: Vec<f64> = (0..12).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let back = dct_mid_inverse(&plan, &dct_mid_forward(&plan, &vals).unwrap()).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * vals.iter().fold(1.0_f64, |m, v| m.max(v.abs())));
        }
    }

    #[test]
    fn regular_transform_is_involution() {
        let g = grid(GridFamily::Regular, 9, 1);
        let plan = TransformPlan::for_axis(&g, Axis::X);
        let vals: Vec<f64> = (0..10).map(|i| (i as f64 - 3.2).tanh()).collect();
        let twice = dct_reg_forward(&plan, &dct_reg_forward(&plan, &vals).unwrap()).unwrap();
        for (a, b) in vals.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn lane_ops_validate_family_and_length() {
        let plan = TransformPlan::for_axis(&grid(GridFamily::MidPoint, 4, 1), Axis::X);
        assert!(matches!(
            dct_mid_forward(&plan, &[0.0; 3]),
            Err(Error::LaneLength { expected: 4, got: 3 })
        ));
        assert!(dct_reg_forward(&plan, &[0.0; 4]).is_err());
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        for family in [GridFamily::MidPoint, GridFamily::Regular] {
            let g = GridSpec::new(
                Domain::new(-3.0, 2.0, 0.0, 4.0).unwrap(),
                family,
                10,
                7,
            )
            .unwrap();
            let ops = SpectralOps::new(&g);
            let u = Field::sample(&g, |_, _| 3.7).unwrap();
            let lap = ops.laplacian(&u).unwrap();
            assert!(lap.max_abs() <= 1e-12 * 3.7);
        }
    }

    #[test]
    fn laplacian_is_exact_on_cosine_modes() {
        for family in [GridFamily::MidPoint, GridFamily::Regular] {
            let dom = Domain::new(-1.0, 3.0, 0.5, 2.5).unwrap();
            let g = GridSpec::new(dom, family, 12, 9).unwrap();
            let ops = SpectralOps::new(&g);
            let mux = std::f64::consts::PI / dom.extent_x();
            let muy = std::f64::consts::PI / dom.extent_y();
            let (mx, my) = (3.0, 2.0);
            let u = Field::sample(&g, |x, y| {
                (mx * mux * (x - dom.a)).cos() * (my * muy * (y - dom.c)).cos()
            })
            .unwrap();
            let lap = ops.laplacian(&u).unwrap();
            let factor = -((mx * mux).powi(2) + (my * muy).powi(2));
            let scale = lap.max_abs();
            for (l, uu) in lap.data().iter().zip(u.data()) {
                assert!((l - factor * uu).abs() <= 1e-11 * scale, "family {family:?}");
            }
        }
    }

    #[test]
    fn helmholtz_solves_to_small_residual() {
        for family in [GridFamily::MidPoint, GridFamily::Regular] {
            let g = GridSpec::new(Domain::new(0.0, 2.0, 0.0, 1.0).unwrap(), family, 16, 8).unwrap();
            let ops = SpectralOps::new(&g);
            let rhs = Field::sample(&g, |x, y| (x - 0.7).exp() * (3.0 * y).sin()).unwrap();
            for c in [1e-6, 1e-2, 1.0] {
                let w = ops.helmholtz_solve(&rhs, c).unwrap();
                let lap = ops.laplacian(&w).unwrap();
                let scale = rhs.max_abs();
                for ((wv, lv), rv) in w.data().iter().zip(lap.data()).zip(rhs.data()) {
                    assert!((wv - c * lv - rv).abs() <= 1e-10 * scale, "c = {c}");
                }
            }
        }
    }

    #[test]
    fn helmholtz_rejects_nonpositive_shift() {
        let g = grid(GridFamily::MidPoint, 4, 4);
        let ops = SpectralOps::new(&g);
        let rhs = Field::zeros(&g);
        assert!(ops.helmholtz_solve(&rhs, 0.0).is_err());
        assert!(ops.helmholtz_solve(&rhs, -1.0).is_err());
    }

    #[test]
    fn dense_diff_matrix_is_guarded() {
        let g = grid(GridFamily::MidPoint, 65, 1);
        assert!(dense_diff_matrix(&g, Axis::X).is_err());
    }

    #[test]
    fn single_node_axis_transforms_are_identity() {
        let g = grid(GridFamily::MidPoint, 8, 1);
        let plan = TransformPlan::for_axis(&g, Axis::Y);
        assert_eq!(plan.len(), 1);
        let k = dct_mid_forward(&plan, &[2.5]).unwrap();
        assert_eq!(k, vec![2.5]);
        let v = dct_mid_inverse(&plan, &[2.5]).unwrap();
        assert_eq!(v, vec![2.5]);
    }
}
