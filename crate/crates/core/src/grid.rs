//! Grids, fields and weighted inner products.
//!
//! Two node families share one discrete calculus on the rectangle
//! `[a,b] x [c,d]`:
//!
//! * `MidPoint`: cell centers `x_j = a + (j + 1/2) h`, uniform quadrature
//!   weight `h_x h_y` per node;
//! * `Regular`: cell vertices `x_j = a + j h` (one more node per axis), with
//!   the trapezoid-style weight `h_x h_y / (a_j b_k)` where the per-axis
//!   factor is 2 at the two boundary nodes and 1 inside.
//!
//! All reductions use Neumaier-compensated summation: the energy closures
//! downstream chase residuals near 1e-14 relative, which plain summation
//! noise would swamp on 128x128 grids.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridFamily {
    MidPoint,
    Regular,
}

impl GridFamily {
    /// Short label used in file headers and CLI switches.
    pub fn label(self) -> &'static str {
        match self {
            GridFamily::MidPoint => "mid",
            GridFamily::Regular => "regular",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "mid" => Ok(GridFamily::MidPoint),
            "regular" => Ok(GridFamily::Regular),
            other => Err(Error::InvalidArgument(format!(
                "unknown grid family `{other}` (expected `mid` or `regular`)"
            ))),
        }
    }
}

/// Rectangle `[a,b] x [c,d]`. Degenerate 1-D problems use a unit-height
/// strip and a single cell along y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let all_finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !all_finite || b <= a || d <= c {
            return Err(Error::InvalidArgument(format!(
                "domain must be a finite rectangle with a < b and c < d, got [{a}, {b}] x [{c}, {d}]"
            )));
        }
        Ok(Domain { a, b, c, d })
    }

    pub fn extent_x(&self) -> f64 {
        self.b - self.a
    }

    pub fn extent_y(&self) -> f64 {
        self.d - self.c
    }

    pub fn area(&self) -> f64 {
        self.extent_x() * self.extent_y()
    }
}

/// A realized grid: node coordinates plus per-axis quadrature weights.
///
/// `nx`/`ny` count cells per axis; the node count per axis is `nx` for the
/// mid-point family and `nx + 1` for the regular one.
#[derive(Debug)]
pub struct GridSpec {
    domain: Domain,
    family: GridFamily,
    nx: usize,
    ny: usize,
    nodes_x: Vec<f64>,
    nodes_y: Vec<f64>,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

fn axis_nodes(a: f64, h: f64, n: usize, family: GridFamily) -> Vec<f64> {
    match family {
        GridFamily::MidPoint => (0..n).map(|j| a + (j as f64 + 0.5) * h).collect(),
        GridFamily::Regular => (0..=n).map(|j| a + j as f64 * h).collect(),
    }
}

fn axis_weights(h: f64, n: usize, family: GridFamily) -> Vec<f64> {
    match family {
        GridFamily::MidPoint => vec![h; n],
        GridFamily::Regular => {
            let mut w = vec![h; n + 1];
            w[0] = 0.5 * h;
            w[n] = 0.5 * h;
            w
        }
    }
}

impl GridSpec {
    pub fn new(domain: Domain, family: GridFamily, nx: usize, ny: usize) -> Result<Arc<Self>> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least one cell per axis, got {nx} x {ny}"
            )));
        }
        let hx = domain.extent_x() / nx as f64;
        let hy = domain.extent_y() / ny as f64;
        Ok(Arc::new(GridSpec {
            domain,
            family,
            nx,
            ny,
            nodes_x: axis_nodes(domain.a, hx, nx, family),
            nodes_y: axis_nodes(domain.c, hy, ny, family),
            wx: axis_weights(hx, nx, family),
            wy: axis_weights(hy, ny, family),
        }))
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn family(&self) -> GridFamily {
        self.family
    }

    /// Cells along x.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Cells along y.
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.domain.extent_x() / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.domain.extent_y() / self.ny as f64
    }

    pub fn node_count_x(&self) -> usize {
        self.nodes_x.len()
    }

    pub fn node_count_y(&self) -> usize {
        self.nodes_y.len()
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.nodes_x.len() * self.nodes_y.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes_x(&self) -> &[f64] {
        &self.nodes_x
    }

    pub fn nodes_y(&self) -> &[f64] {
        &self.nodes_y
    }

    /// Quadrature weight of node `(i, k)`.
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        self.wx[i] * self.wy[k]
    }

    pub(crate) fn weights_x(&self) -> &[f64] {
        &self.wx
    }

    pub(crate) fn weights_y(&self) -> &[f64] {
        &self.wy
    }

    /// Structural equality: same family, cell counts and domain.
    pub fn same(a: &GridSpec, b: &GridSpec) -> bool {
        a.family == b.family && a.nx == b.nx && a.ny == b.ny && a.domain == b.domain
    }
}

/// Neumaier variant of Kahan summation.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Scalar field sampled on a grid, row-major with the x index as row.
#[derive(Clone)]
pub struct Field {
    grid: Arc<GridSpec>,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<GridSpec>) -> Field {
        Field {
            grid: Arc::clone(grid),
            data: vec![0.0; grid.len()],
        }
    }

    /// Evaluate `f(x, y)` on every node. Rejects non-finite samples so a bad
    /// initial condition fails at setup, not ten thousand steps later.
    pub fn sample(grid: &Arc<GridSpec>, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        let ncy = grid.node_count_y();
        let mut data = vec![0.0; grid.len()];
        for (i, &x) in grid.nodes_x().iter().enumerate() {
            for (k, &y) in grid.nodes_y().iter().enumerate() {
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample { i, k, x, y, value: v });
                }
                data[i * ncy + k] = v;
            }
        }
        Ok(Field {
            grid: Arc::clone(grid),
            data,
        })
    }

    pub fn from_data(grid: &Arc<GridSpec>, data: Vec<f64>) -> Result<Field> {
        if data.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: (grid.node_count_x(), grid.node_count_y()),
                got: (data.len(), 1),
            });
        }
        Ok(Field {
            grid: Arc::clone(grid),
            data,
        })
    }

    /// Build a field as `out[idx] = f(idx)` over the flat row-major index.
    /// The workhorse behind the fused element-wise kernels in the steppers.
    pub fn build(grid: &Arc<GridSpec>, f: impl Fn(usize) -> f64 + Sync + Send) -> Field {
        let mut data = vec![0.0; grid.len()];
        par::fill_indexed(&mut data, f);
        Field {
            grid: Arc::clone(grid),
            data,
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.grid.node_count_y() + k]
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.data {
            *v *= alpha;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || GridSpec::same(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// `alpha * x + beta * y`.
pub fn lin_comb(alpha: f64, x: &Field, beta: f64, y: &Field) -> Result<Field> {
    x.check_same_grid(y)?;
    let xd = x.data();
    let yd = y.data();
    Ok(Field::build(x.grid(), |i| alpha * xd[i] + beta * yd[i]))
}

/// Weighted sum of `term(values...)` over all nodes, compensated per row and
/// across rows. `K` fields are read in lockstep; all must share the grid.
pub fn weighted_sum<const K: usize>(
    fields: [&Field; K],
    term: impl Fn([f64; K]) -> f64 + Sync,
) -> Result<f64> {
    assert!(K > 0);
    for f in &fields[1..] {
        fields[0].check_same_grid(f)?;
    }
    let grid = fields[0].grid();
    let ncy = grid.node_count_y();
    let wx = grid.weights_x();
    let wy = grid.weights_y();
    let rows = grid.node_count_x();
    let partials = par::map_rows(rows, |i| {
        let base = i * ncy;
        let row_sum = neumaier_sum((0..ncy).map(|k| {
            let vals = fields.map(|f| f.data()[base + k]);
            wy[k] * term(vals)
        }));
        wx[i] * row_sum
    });
    Ok(neumaier_sum(partials))
}

/// Discrete inner product of the grid family (weighted, compensated).
pub fn inner(u: &Field, w: &Field) -> Result<f64> {
    weighted_sum([u, w], |[a, b]| a * b)
}

/// Norm induced by [`inner`].
pub fn norm(u: &Field) -> f64 {
    inner(u, u).expect("field is on its own grid").max(0.0).sqrt()
}

/// Solution pair (u, v = u_t) on one grid.
#[derive(Clone)]
pub struct State {
    pub u: Field,
    pub v: Field,
}

impl State {
    pub fn new(u: Field, v: Field) -> Result<State> {
        u.check_same_grid(&v)?;
        Ok(State { u, v })
    }
}

// ---------------------------------------------------------------------------
// snapshot format
// ---------------------------------------------------------------------------
//
// One UTF-8 file per field:
//   # t=<time> family=<mid|regular> nx=<Nx> ny=<Ny> a=<a> b=<b> c=<c> d=<d>
// followed by one comma-separated row per x index. 17 significant digits,
// which round-trips f64 exactly.

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write one field with its time stamp in the snapshot format.
pub fn write_snapshot(field: &Field, t: f64, path: &Path) -> Result<()> {
    let grid = field.grid();
    let dom = grid.domain();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "# t={} family={} nx={} ny={} a={} b={} c={} d={}",
        fmt_f64(t),
        grid.family().label(),
        grid.nx(),
        grid.ny(),
        fmt_f64(dom.a),
        fmt_f64(dom.b),
        fmt_f64(dom.c),
        fmt_f64(dom.d)
    )?;
    let ncy = grid.node_count_y();
    let mut line = String::new();
    for row in field.data().chunks(ncy) {
        line.clear();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            let _ = write!(line, "{v:.16e}");
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

fn header_value<'a>(tokens: &'a [(&'a str, &'a str)], key: &str) -> Result<&'a str> {
    tokens
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::SnapshotParse(format!("header missing `{key}`")))
}

/// Read a snapshot back: returns the stamped time and the field.
pub fn read_snapshot(path: &Path) -> Result<(f64, Field)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::SnapshotParse("empty file".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::SnapshotParse("first line is not a `#` header".into()))?;
    let tokens: Vec<(&str, &str)> = header
        .split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect();
    let parse = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::SnapshotParse(format!("bad float `{s}` in header")))
    };
    let t = parse(header_value(&tokens, "t")?)?;
    let family = GridFamily::from_label(header_value(&tokens, "family")?)?;
    let nx: usize = header_value(&tokens, "nx")?
        .parse()
        .map_err(|_| Error::SnapshotParse("bad nx".into()))?;
    let ny: usize = header_value(&tokens, "ny")?
        .parse()
        .map_err(|_| Error::SnapshotParse("bad ny".into()))?;
    let domain = Domain::new(
        parse(header_value(&tokens, "a")?)?,
        parse(header_value(&tokens, "b")?)?,
        parse(header_value(&tokens, "c")?)?,
        parse(header_value(&tokens, "d")?)?,
    )?;
    let grid = GridSpec::new(domain, family, nx, ny)?;
    let mut data = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split(',') {
            data.push(
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::SnapshotParse(format!("bad value `{tok}`")))?,
            );
        }
    }
    if data.len() != grid.len() {
        return Err(Error::SnapshotParse(format!(
            "expected {} values, found {}",
            grid.len(),
            data.len()
        )));
    }
    Ok((t, Field::from_data(&grid, data)?))
}
