//! Slow, direct reference implementations for cross-checking the library.
//!
//! Everything here works on plain buffers and follows the textbook
//! definitions as literally as possible; speed is irrelevant.

use std::f64::consts::PI;

/// Small deterministic generator (SplitMix64) so oracle inputs do not depend
/// on the RNG crates under test.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

pub mod glcm {
    /// Pooled symmetric co-occurrence probabilities, `levels × levels`
    /// row-major. `offsets` are `(dx, dy)` with rows growing downwards.
    pub fn cooccurrence(
        px: &[u16],
        w: usize,
        h: usize,
        levels: usize,
        offsets: &[(isize, isize)],
    ) -> Vec<f64> {
        let mut counts = vec![vec![0u64; levels]; levels];
        for &(dx, dy) in offsets {
            for y in 0..h as isize {
                for x in 0..w as isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let a = px[(y as usize) * w + x as usize] as usize;
                    let b = px[(ny as usize) * w + nx as usize] as usize;
                    counts[a][b] += 1;
                    counts[b][a] += 1;
                }
            }
        }
        let total: u64 = counts.iter().flatten().sum();
        counts
            .into_iter()
            .flatten()
            .map(|c| c as f64 / total as f64)
            .collect()
    }

    /// Contrast, homogeneity, energy and correlation (`None` when a
    /// marginal is constant).
    pub fn statistics(p: &[f64], levels: usize) -> (f64, f64, f64, Option<f64>) {
        let at = |i: usize, j: usize| p[i * levels + j];
        let (mut contrast, mut homogeneity, mut energy) = (0.0, 0.0, 0.0);
        let (mut mu_i, mut mu_j) = (0.0, 0.0);
        for i in 0..levels {
            for j in 0..levels {
                let d = i as f64 - j as f64;
                contrast += d * d * at(i, j);
                homogeneity += at(i, j) / (1.0 + d.abs());
                energy += at(i, j) * at(i, j);
                mu_i += i as f64 * at(i, j);
                mu_j += j as f64 * at(i, j);
            }
        }
        let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
        for i in 0..levels {
            for j in 0..levels {
                var_i += (i as f64 - mu_i).powi(2) * at(i, j);
                var_j += (j as f64 - mu_j).powi(2) * at(i, j);
                cov += (i as f64 - mu_i) * (j as f64 - mu_j) * at(i, j);
            }
        }
        let corr = if var_i.sqrt() < 1e-12 || var_j.sqrt() < 1e-12 {
            None
        } else {
            Some(cov / (var_i.sqrt() * var_j.sqrt()))
        };
        (contrast, homogeneity, energy, corr)
    }
}

pub mod lbp {
    use std::f64::consts::PI;

    /// Neighbour `p` of 8 on the unit circle, counter-clockwise from the
    /// right, in image coordinates (y down).
    fn neighbour(p: usize) -> (isize, isize) {
        let theta = 2.0 * PI * p as f64 / 8.0;
        let dx = theta.cos().round() as isize;
        let dy = -(theta.sin().round() as isize);
        (dx, dy)
    }

    /// riu2 histogram of interior pixels, straight from the definition:
    /// sign bits, circular transition count, then bit count or `P + 1`.
    pub fn riu2_histogram(px: &[u16], w: usize, h: usize) -> [u64; 10] {
        let mut hist = [0u64; 10];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let c = px[y * w + x];
                let bits: Vec<u8> = (0..8)
                    .map(|p| {
                        let (dx, dy) = neighbour(p);
                        let v = px[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
                        u8::from(v >= c)
                    })
                    .collect();
                let transitions = (0..8).filter(|&p| bits[p] != bits[(p + 1) % 8]).count();
                let label = if transitions <= 2 {
                    bits.iter().map(|&b| b as usize).sum()
                } else {
                    9
                };
                hist[label] += 1;
            }
        }
        hist
    }

    /// Rotates a `w × h` buffer 90° clockwise; the result is `h × w`.
    pub fn rotate90(px: &[u16], w: usize, h: usize) -> Vec<u16> {
        let mut out = vec![0; w * h];
        for y in 0..h {
            for x in 0..w {
                // (x, y) -> (h - 1 - y, x) in an h-wide image
                out[x * h + (h - 1 - y)] = px[y * w + x];
            }
        }
        out
    }
}

pub mod moments {
    /// Population mean, variance, skewness and excess kurtosis by direct
    /// summation over `values`.
    pub fn central(values: &[f64]) -> (f64, f64, f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let m = |k: i32| values.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
        let (m2, m3, m4) = (m(2), m(3), m(4));
        (mean, m2, m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    }

    /// Shannon entropy in bits of a count histogram.
    pub fn entropy(counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                -p * p.log2()
            })
            .sum()
    }

    /// Median by full sort.
    pub fn median(values: &[f64]) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

pub mod qp {
    /// Euclidean projection onto `{0 ≤ a ≤ c, Σa = 1}` by bisection on the
    /// shift `τ` in `a = clip(v − τ, 0, c)`.
    fn project(v: &[f64], c: f64) -> Vec<f64> {
        let mass = |tau: f64| v.iter().map(|x| (x - tau).clamp(0.0, c)).sum::<f64>();
        let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - c - 1.0;
        let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if mass(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tau = 0.5 * (lo + hi);
        v.iter().map(|x| (x - tau).clamp(0.0, c)).collect()
    }

    /// Solves `min ½ αᵀKα` over the capped simplex. Accelerated projected
    /// gradient finds the active set; the free variables are then solved
    /// exactly from the KKT linear system and the result is accepted once it
    /// is feasible and optimal. Returns α.
    pub fn one_class_dual(k: &[Vec<f64>], c: f64) -> Vec<f64> {
        let m = k.len();
        // Lipschitz bound: largest absolute row sum
        let lip = k
            .iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let step = 1.0 / lip;
        let grad = |a: &[f64]| -> Vec<f64> {
            k.iter()
                .map(|r| r.iter().zip(a).map(|(x, y)| x * y).sum())
                .collect()
        };
        let obj = |a: &[f64]| -> f64 { 0.5 * grad(a).iter().zip(a).map(|(g, x)| g * x).sum::<f64>() };
        let mut x = project(&vec![1.0 / m as f64; m], c);
        let mut y = x.clone();
        let mut t = 1.0f64;
        for it in 0..1_000_000 {
            if it % 20 == 0 {
                if let Some(exact) = polish(k, &x, c) {
                    return exact;
                }
            }
            let g = grad(&y);
            let next = project(
                &y.iter().zip(&g).map(|(yi, gi)| yi - step * gi).collect::<Vec<_>>(),
                c,
            );
            // restart momentum when the objective goes up
            if obj(&next) > obj(&x) {
                t = 1.0;
                y = x.clone();
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            y = next
                .iter()
                .zip(&x)
                .map(|(n, o)| n + beta * (n - o))
                .collect();
            x = next;
            t = t_next;
        }
        panic!("projected gradient oracle did not settle");
    }

    /// Solves the KKT system on the free set implied by `a` (entries exactly
    /// at 0 or `c` stay there) and checks optimality of the result.
    fn polish(k: &[Vec<f64>], a: &[f64], c: f64) -> Option<Vec<f64>> {
        let m = a.len();
        // entries within a hair of a bound are snapped onto it
        let snap = 1e-9 * c;
        let free: Vec<usize> = (0..m).filter(|&i| a[i] > snap && a[i] < c - snap).collect();
        let at_c: Vec<usize> = (0..m).filter(|&i| a[i] >= c - snap).collect();
        let mut out: Vec<f64> = a.iter().map(|&v| if v >= c - snap { c } else { 0.0 }).collect();
        if !free.is_empty() {
            // [K_FF −1; 1ᵀ 0] [α_F; ρ] = [−K_FC c; 1 − |C| c]
            let f = free.len();
            let mut sys = vec![vec![0.0; f + 2]; f + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    sys[r][s] = k[i][j];
                }
                sys[r][f] = -1.0;
                sys[r][f + 1] = -at_c.iter().map(|&j| k[i][j] * c).sum::<f64>();
            }
            for s in 0..f {
                sys[f][s] = 1.0;
            }
            sys[f][f + 1] = 1.0 - at_c.len() as f64 * c;
            let sol = super::linear::solve(sys)?;
            for (r, &i) in free.iter().enumerate() {
                if !(sol[r] > -1e-12 && sol[r] < c + 1e-12) {
                    return None;
                }
                out[i] = sol[r].clamp(0.0, c);
            }
        } else if (at_c.len() as f64 * c - 1.0).abs() > 1e-12 {
            return None;
        }
        let g: Vec<f64> = k
            .iter()
            .map(|r| r.iter().zip(&out).map(|(x, y)| x * y).sum())
            .collect();
        (kkt_gap(&g, &out, c) < 1e-12).then_some(out)
    }

    /// Largest gradient among α that can shrink minus the smallest among α
    /// that can grow; zero at the optimum.
    fn kkt_gap(g: &[f64], a: &[f64], c: f64) -> f64 {
        let low = a
            .iter()
            .zip(g)
            .filter(|(&ai, _)| ai > 0.0)
            .map(|(_, &gi)| gi)
            .fold(f64::NEG_INFINITY, f64::max);
        let up = a
            .iter()
            .zip(g)
            .filter(|(&ai, _)| ai < c)
            .map(|(_, &gi)| gi)
            .fold(f64::INFINITY, f64::min);
        (low - up).max(0.0)
    }

    /// Offset from KKT: mean gradient over free α, else the midpoint of the
    /// feasible interval (finite end when one-sided). `tol` decides which α
    /// count as free.
    pub fn offset(k: &[Vec<f64>], alpha: &[f64], c: f64, tol: f64) -> f64 {
        let g: Vec<f64> = k
            .iter()
            .map(|r| r.iter().zip(alpha).map(|(x, y)| x * y).sum())
            .collect();
        let free: Vec<f64> = alpha
            .iter()
            .zip(&g)
            .filter(|(&a, _)| a > tol && a < c - tol)
            .map(|(_, &gi)| gi)
            .collect();
        if !free.is_empty() {
            return free.iter().sum::<f64>() / free.len() as f64;
        }
        let upper = alpha
            .iter()
            .zip(&g)
            .filter(|(&a, _)| a <= tol)
            .map(|(_, &gi)| gi)
            .fold(f64::INFINITY, f64::min);
        let lower = alpha
            .iter()
            .zip(&g)
            .filter(|(&a, _)| a >= c - tol)
            .map(|(_, &gi)| gi)
            .fold(f64::NEG_INFINITY, f64::max);
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => 0.5 * (lower + upper),
            (true, false) => lower,
            _ => upper,
        }
    }
}

mod linear {
    /// Gaussian elimination with partial pivoting on an augmented matrix.
    pub fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
        let n = a.len();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
            if a[pivot][col].abs() < 1e-300 {
                return None;
            }
            a.swap(col, pivot);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
            x[row] = (a[row][n] - s) / a[row][row];
        }
        Some(x)
    }
}

pub mod normal {
    use std::f64::consts::PI;

    /// Φ(x) from the Maclaurin series
    /// `½ + φ(x) Σ x^(2n+1) / (1·3·…·(2n+1))`.
    pub fn cdf_series(x: f64) -> f64 {
        let phi = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let mut term = x;
        let mut sum = x;
        let mut n = 0;
        while term.abs() > 1e-17 * sum.abs() && n < 500 {
            n += 1;
            term *= x * x / (2 * n + 1) as f64;
            sum += term;
        }
        0.5 + phi * sum
    }
}

pub mod eigen {
    /// Classical Jacobi: repeatedly annihilates the largest off-diagonal
    /// entry. Returns eigenvalues sorted descending.
    pub fn classical_jacobi(a: &[Vec<f64>]) -> Vec<f64> {
        let n = a.len();
        let mut a = a.to_vec();
        for _ in 0..100 * n * n {
            let (mut p, mut q, mut big) = (0, 1.min(n - 1), 0.0);
            for i in 0..n {
                for j in i + 1..n {
                    if a[i][j].abs() > big {
                        big = a[i][j].abs();
                        p = i;
                        q = j;
                    }
                }
            }
            if big < 1e-15 {
                break;
            }
            let phi = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
            let (s, c) = phi.sin_cos();
            for k in 0..n {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..n {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
        }
        let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        values.sort_by(|x, y| y.total_cmp(x));
        values
    }
}

pub mod imaging {
    /// Keys cubic kernel, a = −0.5.
    fn keys(t: f64) -> f64 {
        let t = t.abs();
        if t < 1.0 {
            1.5 * t * t * t - 2.5 * t * t + 1.0
        } else if t < 2.0 {
            -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0
        } else {
            0.0
        }
    }

    /// Direct 2-D bicubic evaluation (no separable pass), pixel-centre
    /// aligned, edge-clamped, single channel. Returns unrounded values.
    pub fn bicubic(px: &[u16], w: usize, h: usize, dw: usize, dh: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(dw * dh);
        for y in 0..dh {
            let sy = (y as f64 + 0.5) * h as f64 / dh as f64 - 0.5;
            for x in 0..dw {
                let sx = (x as f64 + 0.5) * w as f64 / dw as f64 - 0.5;
                let mut acc = 0.0;
                for j in (sy.floor() as i64 - 1)..=(sy.floor() as i64 + 2) {
                    for i in (sx.floor() as i64 - 1)..=(sx.floor() as i64 + 2) {
                        let ci = i.clamp(0, w as i64 - 1) as usize;
                        let cj = j.clamp(0, h as i64 - 1) as usize;
                        acc += keys(sx - i as f64) * keys(sy - j as f64) * px[cj * w + ci] as f64;
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    /// CLAHE straight from its description: per-pixel, find the four tiles
    /// whose centres surround it, build each tile's clipped-histogram
    /// mapping from scratch, and blend bilinearly.
    pub fn clahe(px: &[u16], w: usize, h: usize, depth_max: u16, clip_limit: f64, grid: usize) -> Vec<u16> {
        let bins = depth_max as usize + 1;
        let gx = grid.min(w).max(1);
        let gy = grid.min(h).max(1);
        let tw = w.div_ceil(gx);
        let th = h.div_ceil(gy);
        let n = tw * th;
        let mirror = |i: i64, len: usize| -> usize {
            // reflect without repeating the edge: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
            let len = len as i64;
            if len == 1 {
                return 0;
            }
            let mut i = i;
            loop {
                if i < 0 {
                    i = -i;
                } else if i >= len {
                    i = 2 * (len - 1) - i;
                } else {
                    return i as usize;
                }
            }
        };
        let mapping = |tx: usize, ty: usize| -> Vec<u64> {
            let mut hist = vec![0u64; bins];
            for yy in 0..th {
                for xx in 0..tw {
                    let sx = mirror((tx * tw + xx) as i64, w);
                    let sy = mirror((ty * th + yy) as i64, h);
                    hist[px[sy * w + sx] as usize] += 1;
                }
            }
            let limit = ((clip_limit * n as f64 / bins as f64).floor() as u64).max(1);
            let mut excess = 0;
            for b in hist.iter_mut() {
                if *b > limit {
                    excess += *b - limit;
                    *b = limit;
                }
            }
            let each = excess / bins as u64;
            let rest = (excess % bins as u64) as usize;
            for b in hist.iter_mut() {
                *b += each;
            }
            if rest > 0 {
                let stride = (bins / rest).max(1);
                let mut given = 0;
                let mut i = 0;
                while given < rest && i < bins {
                    hist[i] += 1;
                    given += 1;
                    i += stride;
                }
            }
            let mut cdf = 0u64;
            hist.iter()
                .map(|&b| {
                    cdf += b;
                    ((cdf * depth_max as u64 + n as u64 / 2) / n as u64).min(depth_max as u64)
                })
                .collect()
        };
        let maps: Vec<Vec<Vec<u64>>> = (0..gy)
            .map(|ty| (0..gx).map(|tx| mapping(tx, ty)).collect())
            .collect();
        let neighbours = |i: usize, tile: usize, tiles: usize| {
            let centre = (i as f64 + 0.5) / tile as f64 - 0.5;
            let lo = centre.floor();
            let t = centre - lo;
            let a = (lo as i64).clamp(0, tiles as i64 - 1) as usize;
            let b = (lo as i64 + 1).clamp(0, tiles as i64 - 1) as usize;
            (a, b, t)
        };
        let mut out = vec![0u16; w * h];
        for y in 0..h {
            let (y1, y2, fy) = neighbours(y, th, gy);
            for x in 0..w {
                let (x1, x2, fx) = neighbours(x, tw, gx);
                let v = px[y * w + x] as usize;
                let f = |ty: usize, tx: usize| maps[ty][tx][v] as f64;
                let val = (1.0 - fy) * ((1.0 - fx) * f(y1, x1) + fx * f(y1, x2))
                    + fy * ((1.0 - fx) * f(y2, x1) + fx * f(y2, x2));
                out[y * w + x] = val.round().clamp(0.0, depth_max as f64) as u16;
            }
        }
        out
    }
}
