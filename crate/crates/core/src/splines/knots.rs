use crate::error::{Error, Result};

/// An open (clamped) knot vector of degree `p`.
///
/// The first and last knots appear exactly `p + 1` times, interior knots at
/// most `p` times, and there is at least one basis function per degree
/// (`n >= p + 1`). Knot multiplicities are detected with exact comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

/// Nonzero B-spline values and derivatives at a single parameter.
///
/// Entry `k` of each vector belongs to global basis index `span - degree + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub span: usize,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl BasisEval {
    /// Global index of the first nonzero basis function.
    pub fn first_index(&self) -> usize {
        self.span + 1 - self.values.len()
    }
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * p + 2 {
            return Err(Error::KnotVector(format!(
                "degree {p} needs at least {} knots, got {}",
                2 * p + 2,
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::KnotVector("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::KnotVector("knots must be nondecreasing".into()));
        }
        let n = knots.len() - p - 1;
        let (lo, hi) = (knots[0], knots[knots.len() - 1]);
        if lo >= hi {
            return Err(Error::KnotVector("empty parametric domain".into()));
        }
        let first = knots.iter().take_while(|&&k| k == lo).count();
        let last = knots.iter().rev().take_while(|&&k| k == hi).count();
        if first != p + 1 || last != p + 1 {
            return Err(Error::KnotVector(format!(
                "end knots must be repeated exactly {} times (found {first} and {last})",
                p + 1
            )));
        }
        let kv = KnotVector { degree, knots };
        for (value, mult) in kv.breakpoints() {
            if value != lo && value != hi && mult > p {
                return Err(Error::KnotVector(format!(
                    "interior knot {value} has multiplicity {mult} > degree {p}"
                )));
            }
        }
        debug_assert!(n > p);
        Ok(kv)
    }

    /// Open knot vector with the given distinct interior knots on `[lo, hi]`.
    pub fn open_uniform(degree: usize, lo: f64, hi: f64, interior_spans: usize) -> Result<Self> {
        let mut knots = vec![lo; degree + 1];
        for k in 1..interior_spans {
            knots.push(lo + (hi - lo) * k as f64 / interior_spans as f64);
        }
        knots.extend(std::iter::repeat_n(hi, degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Distinct knot values with their multiplicities.
    pub fn breakpoints(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((v, m)) if *v == k => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    pub fn multiplicity(&self, value: f64) -> usize {
        self.knots.iter().filter(|&&k| k == value).count()
    }

    /// Nonempty knot spans `[a, b)` in increasing order.
    pub fn spans(&self) -> Vec<(f64, f64)> {
        self.breakpoints().windows(2).map(|w| (w[0].0, w[1].0)).collect()
    }

    /// Smallest continuity order over interior knots (`p - m`), or `None`
    /// for a single-span knot vector.
    pub fn min_interior_continuity(&self) -> Option<usize> {
        let (lo, hi) = self.domain();
        self.breakpoints()
            .into_iter()
            .filter(|(v, _)| *v != lo && *v != hi)
            .map(|(_, m)| self.degree - m)
            .min()
    }

    /// Greville abscissae (knot averages), one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.len())
                .map(|i| 0.5 * (self.knots[i] + self.knots[i + 1]))
                .collect();
        }
        let (a, b) = self.domain();
        (0..self.len())
            .map(|i| (self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64).clamp(a, b))
            .collect()
    }

    /// Index `i` with `knots[i] <= x < knots[i + 1]` (0-based). The right end
    /// of the domain maps to the last nonempty span.
    pub fn find_span(&self, x: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain {
                value: x,
                lower: lo,
                upper: hi,
            });
        }
        let n = self.len();
        if x == hi {
            return Ok(n - 1);
        }
        // binary search over knots[p..=n]
        let (mut low, mut high) = (self.degree, n);
        while high - low > 1 {
            let mid = (low + high) / 2;
            if x < self.knots[mid] {
                high = mid;
            } else {
                low = mid;
            }
        }
        Ok(low)
    }

    /// Nonzero basis functions and derivatives up to `max_deriv` (at most 2).
    ///
    /// Derivatives above the degree are identically zero and are returned as
    /// such. At a knot the one-sided limit from the active span is used.
    pub fn eval(&self, x: f64, max_deriv: usize) -> Result<BasisEval> {
        let span = self.find_span(x)?;
        let ders = self.ders_basis(span, x, max_deriv.min(2));
        let mut it = ders.into_iter();
        let values = it.next().unwrap_or_default();
        let zeros = vec![0.0; values.len()];
        let d1 = it.next().unwrap_or_else(|| zeros.clone());
        let d2 = it.next().unwrap_or(zeros);
        Ok(BasisEval { span, values, d1, d2 })
    }

    // Piegl & Tiller style evaluation of all nonzero derivatives on `span`.
    fn ders_basis(&self, span: usize, x: f64, nd: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let u = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; nd + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let nk = nd.min(p);
        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nk {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    let rk = rk as usize;
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                    d = a[s2][0] * ndu[rk][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
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
        for k in 1..=nk {
            for v in ders[k].iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// Returns a copy with `value` inserted (no validation of multiplicity).
    pub(crate) fn with_inserted(&self, value: f64) -> Self {
        let pos = self.knots.partition_point(|&k| k <= value);
        let mut knots = self.knots.clone();
        knots.insert(pos, value);
        KnotVector {
            degree: self.degree,
            knots,
        }
    }

    /// Knot vector of degree `p + 1` with every breakpoint's multiplicity
    /// raised by one.
    pub(crate) fn elevated(&self) -> Self {
        let mut knots = Vec::with_capacity(self.knots.len() + self.breakpoints().len());
        for (v, m) in self.breakpoints() {
            knots.extend(std::iter::repeat_n(v, m + 1));
        }
        KnotVector {
            degree: self.degree + 1,
            knots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bezier2() -> KnotVector {
        KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap()
    }

    fn two_span() -> KnotVector {
        KnotVector::new(2, vec![0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(KnotVector::new(2, vec![0.0, 0.0, 1.0, 1.0, 1.0]).is_err());
        assert!(KnotVector::new(1, vec![0.0, 0.0, 0.0, 1.0, 1.0]).is_err());
        assert!(KnotVector::new(1, vec![0.0, 0.0, 1.0, 0.5, 1.0]).is_err());
        assert!(KnotVector::new(2, vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]).is_err());
        assert!(KnotVector::new(2, vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]).is_ok());
    }

    #[test]
    fn span_lookup() {
        let kv = bezier2();
        assert_eq!(kv.find_span(0.0).unwrap(), 2);
        assert_eq!(kv.find_span(1.0).unwrap(), kv.find_span(0.999).unwrap());
        // brute force: last i with knots[i] <= x < knots[i + 1]
        let kv = two_span();
        for &x in &[0.0, 0.1, 0.5, 0.75, 0.999] {
            let brute = (0..kv.knots().len() - 1)
                .rev()
                .find(|&i| kv.knots()[i] <= x && x < kv.knots()[i + 1])
                .unwrap();
            assert_eq!(kv.find_span(x).unwrap(), brute);
        }
        assert_eq!(kv.knots()[kv.find_span(0.5).unwrap()], 0.5);
        assert!(matches!(kv.find_span(1.5), Err(Error::Domain { .. })));
        assert!(kv.find_span(-1e-12).is_err());
    }

    #[test]
    fn quadratic_bernstein_midpoint() {
        let e = bezier2().eval(0.5, 2).unwrap();
        // Bernstein: C(2,i) 0.5^2
        let want = [0.25, 0.5, 0.25];
        for (a, b) in e.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        // B'' of Bernstein basis of degree 2 is (2, -4, 2)
        for (a, b) in e.d2.iter().zip([2.0, -4.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_above_degree_is_zero() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 0.5, 1.0, 1.0]).unwrap();
        let e = kv.eval(0.3, 2).unwrap();
        assert!(e.d2.iter().all(|&v| v == 0.0));
        assert!((e.d1.iter().sum::<f64>()).abs() < 1e-14);
    }

    #[test]
    fn greville_and_elevated() {
        let kv = two_span();
        assert_eq!(kv.greville(), vec![0.0, 0.25, 0.75, 1.0]);
        let e = kv.elevated();
        assert_eq!(e.knots(), &[0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(e.len(), 6);
        assert_eq!(kv.min_interior_continuity(), Some(1));
        assert_eq!(bezier2().min_interior_continuity(), None);
    }
}
