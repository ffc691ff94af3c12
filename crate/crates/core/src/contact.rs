//! Contact-window extraction and the ordered visit stream.
//!
//! Visibility is sampled on a coarse grid (keep the step at or below 10 s for
//! LEO shells; passes shorter than the step can be missed) and every
//! visibility change is bisected down to the refinement tolerance.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::orbital::{gs_position, is_visible, sat_position, GroundStation, OrbitalElements};
use crate::scalar::{cmp_finite, Scalar};

pub const DEFAULT_COARSE_STEP_S: f64 = 10.0;
pub const DEFAULT_REFINE_TOL_S: f64 = 0.1;

/// One visibility pass of a satellite over the ground station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEvent<T> {
    pub satellite_id: usize,
    pub start_s: T,
    pub end_s: T,
}

impl<T: Scalar> ContactEvent<T> {
    pub fn duration_s(&self) -> T {
        self.end_s - self.start_s
    }
}

/// A model exchange: the instant a satellite becomes visible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit<T> {
    pub satellite_id: usize,
    pub time_s: T,
}

/// Search parameters for [`contact_windows`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSearch<T> {
    pub t0_s: T,
    pub t1_s: T,
    pub coarse_step_s: T,
    pub refine_tol_s: T,
}

impl<T: Scalar> WindowSearch<T> {
    pub fn new(t0_s: T, t1_s: T) -> Self {
        Self {
            t0_s,
            t1_s,
            coarse_step_s: T::lit(DEFAULT_COARSE_STEP_S),
            refine_tol_s: T::lit(DEFAULT_REFINE_TOL_S),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0_s >= T::zero() && self.t0_s < self.t1_s && self.t1_s.is_finite()) {
            return Err(Error::InvalidSearch(format!(
                "need 0 <= t0 < t1, got [{}, {}]",
                self.t0_s, self.t1_s
            )));
        }
        if !(self.coarse_step_s > T::zero()) || !(self.refine_tol_s > T::zero()) {
            return Err(Error::InvalidSearch("step and tolerance must be positive".into()));
        }
        if self.refine_tol_s >= self.coarse_step_s {
            return Err(Error::InvalidSearch(format!(
                "refine tolerance {} must be smaller than coarse step {}",
                self.refine_tol_s, self.coarse_step_s
            )));
        }
        Ok(())
    }
}

/// Visibility windows of every satellite, sorted by `(start, satellite_id)`.
pub fn contact_windows<T: Scalar>(
    constellation: &[OrbitalElements<T>],
    gs: &GroundStation<T>,
    search: &WindowSearch<T>,
) -> Result<Vec<ContactEvent<T>>> {
    if constellation.is_empty() {
        return Err(Error::InvalidConstellation("no satellites".into()));
    }
    search.validate()?;

    let per_sat: Vec<Vec<ContactEvent<T>>> = constellation
        .par_iter()
        .enumerate()
        .map(|(id, el)| satellite_windows(id, el, gs, search))
        .collect::<Result<_>>()?;

    let mut all: Vec<ContactEvent<T>> = per_sat.into_iter().flatten().collect();
    all.sort_by(|a, b| {
        cmp_finite(a.start_s, b.start_s).then(a.satellite_id.cmp(&b.satellite_id))
    });
    Ok(all)
}

fn satellite_windows<T: Scalar>(
    id: usize,
    el: &OrbitalElements<T>,
    gs: &GroundStation<T>,
    search: &WindowSearch<T>,
) -> Result<Vec<ContactEvent<T>>> {
    let visible = |t: T| is_visible(gs_position(gs, t), sat_position(el, t), gs.min_elevation_rad);

    let WindowSearch {
        t0_s: t0,
        t1_s: t1,
        coarse_step_s: step,
        refine_tol_s: tol,
    } = *search;

    let mut windows = Vec::new();
    let mut open: Option<T> = if visible(t0)? { Some(t0) } else { None };
    let mut prev_t = t0;
    let mut prev_vis = open.is_some();
    let mut k = 1usize;
    loop {
        // Grid points are computed from the index to avoid accumulated drift.
        let t = (t0 + step * T::from_count(k)).min(t1);
        let vis = visible(t)?;
        if vis != prev_vis {
            let edge = bisect(&visible, prev_t, t, prev_vis, tol)?;
            match open.take() {
                None => open = Some(edge),
                Some(start) => push_window(&mut windows, id, start, edge),
            }
        }
        prev_t = t;
        prev_vis = vis;
        if t >= t1 {
            break;
        }
        k += 1;
    }
    if let Some(start) = open {
        push_window(&mut windows, id, start, t1);
    }
    Ok(windows)
}

fn push_window<T: Scalar>(out: &mut Vec<ContactEvent<T>>, id: usize, start: T, end: T) {
    // A refined edge pair can collapse when a pass barely grazes the mask.
    if end > start {
        out.push(ContactEvent {
            satellite_id: id,
            start_s: start,
            end_s: end,
        });
    }
}

/// Locates the visibility change inside `[lo, hi]` to within `tol`, returning
/// the midpoint of the final bracket.
fn bisect<T: Scalar>(
    visible: &impl Fn(T) -> Result<bool>,
    mut lo: T,
    mut hi: T,
    lo_vis: bool,
    tol: T,
) -> Result<T> {
    let two = T::lit(2.0);
    while hi - lo > tol {
        let mid = lo + (hi - lo) / two;
        if visible(mid)? == lo_vis {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) / two)
}

/// Linearizes windows into one exchange per pass at the window start, ordered
/// by time with ties broken by ascending satellite id.
pub fn visit_stream<T: Scalar>(windows: &[ContactEvent<T>]) -> Vec<Visit<T>> {
    let mut visits: Vec<Visit<T>> = windows
        .iter()
        .map(|w| Visit {
            satellite_id: w.satellite_id,
            time_s: w.start_s,
        })
        .collect();
    visits.sort_by(|a, b| cmp_finite(a.time_s, b.time_s).then(a.satellite_id.cmp(&b.satellite_id)));
    visits
}
