//! Dominance, reference fronts and front-quality indicators.
//!
//! Indicators are computed in normalised objective space, using bounds taken
//! from the reference front of an instance, so values are comparable across
//! instances.

use thiserror::Error;

/// A point in objective space, `[makespan, carbon]`. Both minimised.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IndicatorError {
    #[error("solution set is empty")]
    EmptySet,
    #[error("reference set is empty")]
    EmptyReference,
}

#[inline]
pub fn dominates(a: &Point, b: &Point) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Mutually non-dominated points, sorted by the first objective.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Front {
    points: Vec<Point>,
}

impl Front {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

/// Keep the points no other point dominates. Duplicates collapse to one.
pub fn nondominated_filter(points: &[Point]) -> Front {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut kept: Vec<Point> = Vec::new();
    for p in sorted {
        match kept.last() {
            Some(last) if p[1] >= last[1] => {}
            _ => kept.push(p),
        }
    }
    Front { points: kept }
}

/// Per-objective box used for normalisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn of(points: &[Point]) -> Option<Bounds> {
        let first = points.first()?;
        let mut b = Bounds {
            min: *first,
            max: *first,
        };
        for p in points {
            for k in 0..2 {
                b.min[k] = b.min[k].min(p[k]);
                b.max[k] = b.max[k].max(p[k]);
            }
        }
        Some(b)
    }

    /// Affine map to the unit box. A degenerate objective maps to 0.
    pub fn normalize(&self, p: &Point) -> Point {
        let mut out = [0.0; 2];
        for k in 0..2 {
            let range = self.max[k] - self.min[k];
            out[k] = if range > 0.0 { (p[k] - self.min[k]) / range } else { 0.0 };
        }
        out
    }

    pub fn denormalize(&self, q: &Point) -> Point {
        let mut out = [0.0; 2];
        for k in 0..2 {
            let range = self.max[k] - self.min[k];
            out[k] = if range > 0.0 { self.min[k] + q[k] * range } else { self.min[k] };
        }
        out
    }

    pub fn swapped(&self) -> Bounds {
        Bounds {
            min: [self.min[1], self.min[0]],
            max: [self.max[1], self.max[0]],
        }
    }
}

pub fn normalize(points: &[Point], bounds: &Bounds) -> Vec<Point> {
    points.iter().map(|p| bounds.normalize(p)).collect()
}

#[inline]
fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn min_dist2(x: &Point, set: &[Point]) -> f64 {
    set.iter().map(|y| dist2(x, y)).fold(f64::INFINITY, f64::min)
}

fn check(p: &[Point], reference: &[Point]) -> Result<(), IndicatorError> {
    if p.is_empty() {
        return Err(IndicatorError::EmptySet);
    }
    if reference.is_empty() {
        return Err(IndicatorError::EmptyReference);
    }
    Ok(())
}

/// Which summation the distance indicators use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formula {
    /// GD sums over the obtained set, IGD over the reference set.
    #[default]
    Standard,
    /// Index placement exactly as typeset in the source formulas: GD sums
    /// over the reference set but divides by `|P|`; IGD sums over `P` but
    /// divides by `|P*|`. Kept for side-by-side reporting only.
    AsPrinted,
}

/// Generational distance: `sqrt(sum_{x in P} d(x, P*)^2) / |P|`.
pub fn gd(p: &[Point], reference: &[Point]) -> Result<f64, IndicatorError> {
    gd_with(p, reference, Formula::Standard)
}

pub fn gd_with(p: &[Point], reference: &[Point], formula: Formula) -> Result<f64, IndicatorError> {
    check(p, reference)?;
    let (outer, inner) = match formula {
        Formula::Standard => (p, reference),
        Formula::AsPrinted => (reference, p),
    };
    let sum: f64 = outer.iter().map(|x| min_dist2(x, inner)).sum();
    Ok(sum.sqrt() / p.len() as f64)
}

/// Inverted generational distance: `sum_{y in P*} d(y, P) / |P*|`.
pub fn igd(p: &[Point], reference: &[Point]) -> Result<f64, IndicatorError> {
    igd_with(p, reference, Formula::Standard)
}

pub fn igd_with(p: &[Point], reference: &[Point], formula: Formula) -> Result<f64, IndicatorError> {
    check(p, reference)?;
    let (outer, inner) = match formula {
        Formula::Standard => (reference, p),
        Formula::AsPrinted => (p, reference),
    };
    let sum: f64 = outer.iter().map(|y| min_dist2(y, inner).sqrt()).sum();
    Ok(sum / reference.len() as f64)
}

/// Extent of a normalised set: the diagonal of its bounding box after
/// clamping to the unit box, so it lies in `[0, sqrt(2)]`. Larger is better.
/// Points beyond the reference bounds are dominated and add no extent.
pub fn spread(p: &[Point]) -> Result<f64, IndicatorError> {
    let clamped: Vec<Point> = p.iter().map(|q| [q[0].clamp(0.0, 1.0), q[1].clamp(0.0, 1.0)]).collect();
    let b = Bounds::of(&clamped).ok_or(IndicatorError::EmptySet)?;
    let dx = b.max[0] - b.min[0];
    let dy = b.max[1] - b.min[1];
    Ok((dx * dx + dy * dy).sqrt())
}

/// Reference front shared by every run on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFront {
    pub front: Front,
    pub bounds: Bounds,
}

/// Union of all contributed archives, filtered. When an exact front is
/// available it joins the union, which then reduces to the exact front.
pub fn build_reference_front<'a, I>(archives: I, exact: Option<&[Point]>) -> Option<ReferenceFront>
where
    I: IntoIterator<Item = &'a [Point]>,
{
    let mut all: Vec<Point> = archives.into_iter().flatten().copied().collect();
    if let Some(exact) = exact {
        all.extend_from_slice(exact);
    }
    let front = nondominated_filter(&all);
    let bounds = Bounds::of(front.points())?;
    Some(ReferenceFront { front, bounds })
}

/// Spread, GD and IGD of one raw (unnormalised) set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicators {
    pub spread: f64,
    pub gd: f64,
    pub igd: f64,
}

impl Indicators {
    pub fn compute(p: &[Point], reference: &ReferenceFront) -> Result<Indicators, IndicatorError> {
        let np = normalize(p, &reference.bounds);
        let nr = normalize(reference.front.points(), &reference.bounds);
        Ok(Indicators {
            spread: spread(&np)?,
            gd: gd(&np, &nr)?,
            igd: igd(&np, &nr)?,
        })
    }
}
