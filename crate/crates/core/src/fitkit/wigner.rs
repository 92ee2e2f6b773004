//! Reflectivity from the mean amplitudes of two sampled Wigner functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::uncertainty::Measured;

/// Wigner function sampled on a rectangular grid; `values[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid<T = f64> {
    pub xs: Vec<T>,
    pub ys: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> WignerGrid<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>, values: Vec<T>) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 || values.len() != xs.len() * ys.len() {
            return Err(Error::Table(format!(
                "grid of {}x{} axes holds {} values",
                xs.len(),
                ys.len(),
                values.len()
            )));
        }
        Ok(WignerGrid { xs, ys, values })
    }

    /// `n x n` nodes over `[-half_width, half_width]^2` filled from `f(x, y)`.
    pub fn square(n: usize, half_width: T, f: impl Fn(T, T) -> T) -> Self {
        let axis: Vec<T> = (0..n)
            .map(|i| -half_width + (half_width + half_width) * T::lit(i as f64) / T::lit((n - 1) as f64))
            .collect();
        let values = axis.iter().flat_map(|&y| axis.iter().map(move |&x| (x, y))).map(|(x, y)| f(x, y)).collect();
        WignerGrid { xs: axis.clone(), ys: axis, values }
    }

    pub fn at(&self, ix: usize, iy: usize) -> T {
        self.values[iy * self.xs.len() + ix]
    }

    /// Area element, assuming uniform spacing.
    pub fn cell_area(&self) -> T {
        (self.xs[1] - self.xs[0]) * (self.ys[1] - self.ys[0])
    }

    pub fn same_axes(&self, other: &Self) -> bool {
        self.xs == other.xs && self.ys == other.ys
    }

    pub fn scaled(&self, factor: T) -> Self {
        WignerGrid { values: self.values.iter().map(|v| *v * factor).collect(), ..self.clone() }
    }

    fn nodes<'a>(&'a self, window: &'a Window<T>) -> impl Iterator<Item = (T, T, T)> + 'a {
        self.ys.iter().enumerate().flat_map(move |(iy, &y)| {
            self.xs
                .iter()
                .enumerate()
                .filter(move |(_, &x)| window.contains(x, y))
                .map(move |(ix, &x)| (x, y, self.at(ix, iy)))
        })
    }
}

/// Coherent state Wigner function `(2 / pi) exp(-2 |alpha - alpha0|^2)`.
pub fn coherent_wigner<T: Scalar>(re: T, im: T) -> impl Fn(T, T) -> T {
    move |x, y| {
        let d2 = (x - re) * (x - re) + (y - im) * (y - im);
        T::lit(2.0 / std::f64::consts::PI) * (T::lit(-2.0) * d2).exp()
    }
}

/// Faint annulus added on top of a measured Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingArtifact<T = f64> {
    pub center: (T, T),
    pub radius: T,
    pub width: T,
    pub height: T,
}

impl<T: Scalar> RingArtifact<T> {
    /// Radius 3 around `center`, width 0.15, height 2e-3.
    pub fn around(center: (T, T)) -> Self {
        RingArtifact { center, radius: T::lit(3.0), width: T::lit(0.15), height: T::lit(2e-3) }
    }

    pub fn value(&self, x: T, y: T) -> T {
        let r = ((x - self.center.0).powi(2) + (y - self.center.1).powi(2)).sqrt();
        let z = (r - self.radius) / self.width;
        self.height * (T::lit(-0.5) * z * z).exp()
    }
}

/// Closed axis-aligned box in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window<T = f64> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> Window<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Self {
        Window { x_min, x_max, y_min, y_max }
    }

    pub fn around(center: (T, T), half_width: T) -> Self {
        Window::new(center.0 - half_width, center.0 + half_width, center.1 - half_width, center.1 + half_width)
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Self) -> Self {
        Window::new(
            self.x_min.min(other.x_min),
            self.x_max.max(other.x_max),
            self.y_min.min(other.y_min),
            self.y_max.max(other.y_max),
        )
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// `<alpha> = sum W(alpha) alpha dA` over the window, without renormalizing `W`.
pub fn mean_amplitude<T: Scalar>(grid: &WignerGrid<T>, window: &Window<T>) -> Result<(T, T)> {
    let da = grid.cell_area();
    let (mut re, mut im, mut count) = (T::zero(), T::zero(), 0usize);
    let (mut inside, mut total) = (T::zero(), T::zero());
    for (x, y, w) in grid.nodes(window) {
        re += w * x;
        im += w * y;
        inside += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyWindow);
    }
    for w in &grid.values {
        total += *w;
    }
    if total > T::zero() && inside < T::lit(0.99) * total {
        log::warn!(
            "wigner window keeps {:.1}% of the quasi-probability mass",
            100.0 * (inside / total).as_f64()
        );
    }
    Ok((re * da, im * da))
}

fn check_pair<T: Scalar>(a: &WignerGrid<T>, b: &WignerGrid<T>) -> Result<()> {
    if !a.same_axes(b) {
        return Err(Error::Table("Wigner grids do not share axes".into()));
    }
    Ok(())
}

/// `|alpha_refl / alpha_ref|^2` with both amplitudes integrated over `window`.
pub fn kappa_from_wigner<T: Scalar>(
    grid_ref: &WignerGrid<T>,
    grid_refl: &WignerGrid<T>,
    window: &Window<T>,
) -> Result<T> {
    kappa_from_wigner_split(grid_ref, window, grid_refl, window)
}

/// As [`kappa_from_wigner`], with a separate window for each grid.
pub fn kappa_from_wigner_split<T: Scalar>(
    grid_ref: &WignerGrid<T>,
    window_ref: &Window<T>,
    grid_refl: &WignerGrid<T>,
    window_refl: &Window<T>,
) -> Result<T> {
    check_pair(grid_ref, grid_refl)?;
    let (r1, i1) = mean_amplitude(grid_ref, window_ref)?;
    let (r2, i2) = mean_amplitude(grid_refl, window_refl)?;
    let n1 = r1 * r1 + i1 * i1;
    if n1 == T::zero() {
        return Err(Error::Degenerate("reference amplitude vanishes in the window".into()));
    }
    Ok((r2 * r2 + i2 * i2) / n1)
}

/// Kappa with first-order uncertainty for independent pixel noise of
/// standard deviation `pixel_sigma` on both grids.
pub fn kappa_with_uncertainty<T: Scalar>(
    grid_ref: &WignerGrid<T>,
    grid_refl: &WignerGrid<T>,
    window: &Window<T>,
    pixel_sigma: T,
) -> Result<Measured<T>> {
    let kappa = kappa_from_wigner(grid_ref, grid_refl, window)?;
    let (r1, i1) = mean_amplitude(grid_ref, window)?;
    let (r2, i2) = mean_amplitude(grid_refl, window)?;
    let da = grid_ref.cell_area();
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (x, y, _) in grid_ref.nodes(window) {
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    let s2 = pixel_sigma * pixel_sigma * da * da;
    let quad = |gx: T, gy: T| s2 * (gx * gx * sxx + gy * gy * syy + T::lit(2.0) * gx * gy * sxy);
    let n1 = r1 * r1 + i1 * i1;
    let two = T::lit(2.0);
    let var = quad(two * r2 / n1, two * i2 / n1) + quad(two * kappa * r1 / n1, two * kappa * i1 / n1);
    Ok(Measured::new(kappa, var.sqrt()))
}

/// RMS of the pixels outside `signal_region`, where the Wigner function is
/// assumed to vanish.
pub fn pixel_noise<T: Scalar>(grid: &WignerGrid<T>, signal_region: &Window<T>) -> Option<T> {
    let mut acc = T::zero();
    let mut n = 0usize;
    for (iy, &y) in grid.ys.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            if !signal_region.contains(x, y) {
                let w = grid.at(ix, iy);
                acc += w * w;
                n += 1;
            }
        }
    }
    (n > 0).then(|| (acc / T::lit(n as f64)).sqrt())
}
