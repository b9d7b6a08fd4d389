//! Uniform 2-D scalar field samples: periodic in x over [0, 2pi), clamped in
//! y over [-ly, ly], with centered stencils inside and one-sided treatment at
//! the y boundary left to the callers (interior-only residuals).

use serde::Serialize;

/// Grid geometry plus row-major samples (`values[j * nx + i]` at
/// `(x_i, y_j)`).
#[derive(Clone, Debug)]
pub struct FieldGrid {
    pub nx: usize,
    pub ny: usize,
    pub ly: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub ly: f64,
}

impl FieldGrid {
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(spec.nx * spec.ny);
        for j in 0..spec.ny {
            let y = spec.y(j);
            for i in 0..spec.nx {
                values.push(f(spec.x(i), y));
            }
        }
        FieldGrid {
            nx: spec.nx,
            ny: spec.ny,
            ly: spec.ly,
            values,
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            ly: self.ly,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FieldGrid {
        FieldGrid {
            nx: self.nx,
            ny: self.ny,
            ly: self.ly,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Centered five-point Laplacian; x wraps periodically, y is evaluated on
    /// interior rows only (`None` on the boundary rows).
    pub fn laplacian(&self) -> Vec<Option<f64>> {
        let spec = self.spec();
        let (dx, dy) = (spec.dx(), spec.dy());
        let mut out = vec![None; self.values.len()];
        for j in 1..self.ny.saturating_sub(1) {
            for i in 0..self.nx {
                let ip = (i + 1) % self.nx;
                let im = (i + self.nx - 1) % self.nx;
                let d2x = (self.at(ip, j) - 2.0 * self.at(i, j) + self.at(im, j)) / (dx * dx);
                let d2y =
                    (self.at(i, j + 1) - 2.0 * self.at(i, j) + self.at(i, j - 1)) / (dy * dy);
                out[j * self.nx + i] = Some(d2x + d2y);
            }
        }
        out
    }

    /// Centered gradient (periodic x, interior y rows; `None` on boundary).
    pub fn gradient(&self) -> Vec<Option<(f64, f64)>> {
        let spec = self.spec();
        let (dx, dy) = (spec.dx(), spec.dy());
        let mut out = vec![None; self.values.len()];
        for j in 1..self.ny.saturating_sub(1) {
            for i in 0..self.nx {
                let ip = (i + 1) % self.nx;
                let im = (i + self.nx - 1) % self.nx;
                let gx = (self.at(ip, j) - self.at(im, j)) / (2.0 * dx);
                let gy = (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * dy);
                out[j * self.nx + i] = Some((gx, gy));
            }
        }
        out
    }

    /// gnuplot-compatible "x,y,value" rows.
    pub fn to_csv(&self) -> String {
        let spec = self.spec();
        let mut s = String::from("x,y,value\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                s.push_str(&format!(
                    "{:.17e},{:.17e},{:.17e}\n",
                    spec.x(i),
                    spec.y(j),
                    self.at(i, j)
                ));
            }
        }
        s
    }

    /// Raw row-major little-endian f64 bytes plus the JSON sidecar.
    pub fn to_binary(&self) -> (Vec<u8>, String) {
        let mut bytes = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let spec = self.spec();
        let sidecar = format!(
            "{{\"nx\":{},\"ny\":{},\"x0\":0.0,\"dx\":{},\"y0\":{},\"dy\":{}}}",
            self.nx,
            self.ny,
            spec.dx(),
            -self.ly,
            spec.dy()
        );
        (bytes, sidecar)
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, ly: f64) -> Self {
        assert!(nx >= 4 && ny >= 4, "grid must be at least 4x4");
        assert!(ly > 0.0);
        GridSpec { nx, ny, ly }
    }

    pub fn dx(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.ly / (self.ny as f64 - 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.ly + j as f64 * self.dy()
    }
}

/// Boolean grid mask with run-length encoding for compact reports.
#[derive(Clone, Debug)]
pub struct Mask {
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.bits.len() as f64
        }
    }

    /// Run lengths, alternating starting with a run of `false` (possibly 0).
    pub fn run_length_encode(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &b in &self.bits {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        runs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_exact_on_quadratic() {
        // u = y^2 has Laplacian 2 exactly under the centered stencil.
        let spec = GridSpec::new(16, 17, 1.0);
        let g = FieldGrid::from_fn(spec, |_, y| y * y);
        for (idx, l) in g.laplacian().iter().enumerate() {
            if let Some(v) = l {
                assert!((v - 2.0).abs() < 1e-10, "idx {idx}: {v}");
            }
        }
        // Zero field, zero Laplacian.
        let z = FieldGrid::from_fn(spec, |_, _| 0.0);
        for l in z.laplacian().iter().flatten() {
            assert_eq!(*l, 0.0);
        }
    }

    #[test]
    fn rle_roundtrip_structure() {
        let m = Mask {
            bits: vec![false, false, true, true, true, false],
        };
        assert_eq!(m.run_length_encode(), vec![2, 3, 1]);
        assert_eq!(m.count(), 3);
        let all_true = Mask {
            bits: vec![true, true],
        };
        assert_eq!(all_true.run_length_encode(), vec![0, 2]);
    }
}
