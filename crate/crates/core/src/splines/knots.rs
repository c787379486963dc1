use crate::error::{Error, Result};

/// A clamped (open) knot vector together with the degree of the B-splines it carries.
///
/// The first and last knots are repeated `degree + 1` times. Knot spans may be
/// empty only through interior knot repetition, which the constructors reject
/// beyond multiplicity `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Validates an arbitrary clamped knot sequence.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::KnotVector(format!(
                "need at least {} knots for degree {p}, got {}",
                2 * (p + 1),
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::KnotVector("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::KnotVector("knots must be non-decreasing".into()));
        }
        let m = knots.len();
        let first = knots[0];
        let last = knots[m - 1];
        if !(last > first) {
            return Err(Error::KnotVector("knot range is empty".into()));
        }
        let start_mult = knots.iter().take_while(|&&k| k == first).count();
        let end_mult = knots.iter().rev().take_while(|&&k| k == last).count();
        if start_mult != p + 1 || end_mult != p + 1 {
            return Err(Error::KnotVector(format!(
                "end knots must be repeated exactly {} times (found {start_mult} and {end_mult})",
                p + 1
            )));
        }
        let mut i = p + 1;
        while i < m - p - 1 {
            let mut j = i;
            while j + 1 < m - p - 1 && knots[j + 1] == knots[i] {
                j += 1;
            }
            if j - i + 1 > p.max(1) {
                return Err(Error::KnotVector(format!(
                    "interior knot {} has multiplicity {} > degree {p}",
                    knots[i],
                    j - i + 1
                )));
            }
            i = j + 1;
        }
        Ok(Self { degree, knots })
    }

    /// Open uniform knot vector on [0, 1] with `num_spans` equal spans of size `1/num_spans`.
    pub fn open_uniform(degree: usize, num_spans: usize) -> Result<Self> {
        if num_spans == 0 {
            return Err(Error::KnotVector("at least one knot span required".into()));
        }
        let mut knots = Vec::with_capacity(num_spans + 2 * degree + 1);
        knots.extend(std::iter::repeat(0.0).take(degree + 1));
        for i in 1..num_spans {
            knots.push(i as f64 / num_spans as f64);
        }
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions `N = len - p - 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Number of nonempty knot spans.
    pub fn num_elements(&self) -> usize {
        self.element_spans().count()
    }

    /// Knot-span indices `s` of the nonempty spans `[ξ_s, ξ_{s+1})`, left to right.
    pub fn element_spans(&self) -> impl Iterator<Item = usize> + '_ {
        let p = self.degree;
        (p..self.num_basis()).filter(move |&s| self.knots[s + 1] > self.knots[s])
    }

    /// Interior knot spacing if the knot vector is uniform.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let spans: Vec<f64> = self
            .element_spans()
            .map(|s| self.knots[s + 1] - self.knots[s])
            .collect();
        let h = spans[0];
        spans
            .iter()
            .all(|&d| (d - h).abs() <= 1e-12 * h.max(1.0))
            .then_some(h)
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Index `s` with `ξ_s ≤ xi < ξ_{s+1}`; the right endpoint belongs to the last span.
    pub fn find_span(&self, xi: f64) -> Result<usize> {
        let (lo, hi) = (self.first(), self.last());
        if !(xi >= lo && xi <= hi) {
            return Err(Error::Domain { value: xi, lo, hi });
        }
        let p = self.degree;
        let n = self.num_basis();
        if xi >= self.knots[n] {
            return Ok(n - 1);
        }
        // Binary search over [p, n).
        let (mut low, mut high) = (p, n);
        while high - low > 1 {
            let mid = (low + high) / 2;
            if xi < self.knots[mid] {
                high = mid;
            } else {
                low = mid;
            }
        }
        Ok(low)
    }

    /// The `p + 1` basis functions that may be nonzero at `xi`, starting at the returned index.
    pub fn eval_basis(&self, xi: f64) -> Result<(usize, Vec<f64>)> {
        let span = self.find_span(xi)?;
        let mut out = vec![0.0; self.degree + 1];
        self.basis_funs(span, xi, &mut out);
        Ok((span - self.degree, out))
    }

    /// Derivatives of order `order` (1 ≤ order ≤ p) of the `p + 1` functions nonzero at `xi`.
    pub fn eval_basis_deriv(&self, xi: f64, order: usize) -> Result<(usize, Vec<f64>)> {
        if order == 0 {
            return self.eval_basis(xi);
        }
        if order > self.degree {
            return Err(Error::Argument(format!(
                "derivative order {order} exceeds degree {}",
                self.degree
            )));
        }
        let span = self.find_span(xi)?;
        let ders = self.ders_basis_funs(span, xi, order);
        Ok((span - self.degree, ders.into_iter().nth(order).unwrap()))
    }

    /// Cox–de Boor triangular evaluation of the nonzero functions on `span`.
    pub(crate) fn basis_funs(&self, span: usize, xi: f64, out: &mut [f64]) {
        let p = self.degree;
        let u = &self.knots;
        let mut left = [0.0f64; 16];
        let mut right = [0.0f64; 16];
        debug_assert!(p < 16);
        out[0] = 1.0;
        for j in 1..=p {
            left[j] = xi - u[span + 1 - j];
            right[j] = u[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
    }

    /// Values and derivatives up to `nders` of the nonzero functions on `span`.
    /// Row `k` of the result holds the `k`-th derivatives.
    pub(crate) fn ders_basis_funs(&self, span: usize, xi: f64, nders: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let u = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - u[span + 1 - j];
            right[j] = u[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let n = nders.min(p);
        let mut ders = vec![vec![0.0; p + 1]; nders + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=n {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if rk >= 0 {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize {
                    k - 1
                } else {
                    p - r
                };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for (k, row) in ders.iter_mut().enumerate().skip(1).take(n) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// Value of the single basis function `i` at `xi` (zero outside its support).
    pub fn basis_function(&self, i: usize, xi: f64) -> Result<f64> {
        let (first, vals) = self.eval_basis(xi)?;
        Ok(if i >= first && i <= first + self.degree {
            vals[i - first]
        } else {
            0.0
        })
    }

    /// The knot vector mirrored about the midpoint of its range.
    pub fn reversed(&self) -> Self {
        let (lo, hi) = (self.first(), self.last());
        let knots = self.knots.iter().rev().map(|&k| lo + hi - k).collect();
        Self {
            degree: self.degree,
            knots,
        }
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.num_basis())
            .map(|i| {
                if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }
}
