//! Ground-level coverage analysis for sensor groups.
//!
//! Sensors are ideal point apertures with an azimuth/elevation frustum cut off
//! at `max_range_m`. A point is seen by a sensor when it is inside the frustum
//! and the straight segment from the aperture to the point does not cross a
//! vehicle occluder box.

mod export;

use nalgebra::{Point3, Rotation3, Vector3};
use thiserror::Error;

use crate::geometry::OrientedBox;
use crate::rig::{Modality, Resolution, RigSpec, Sensor};

/// Occluder boxes that contain a sensor's aperture within this margin never
/// block that sensor. Roof units sit flush on the body proxy.
pub const SELF_OCCLUSION_MARGIN_M: f64 = 0.01;

/// Slack, in pixels, on the image-boundary test of [`project_point`].
pub const PIXEL_EDGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("grid needs extent > cell size > 0 (extent {extent_m} m, cell {cell_m} m)")]
    InvalidGrid { extent_m: f64, cell_m: f64 },
    #[error("radius {radius_m} m must be positive and within the grid half-width {half_width_m} m")]
    RadiusOutOfGrid { radius_m: f64, half_width_m: f64 },
    #[error("radius and angular step must be positive (radius {radius_m}, step {step_rad})")]
    InvalidSweep { radius_m: f64, step_rad: f64 },
    #[error("group has {0} sensors; at most 64 are supported per grid")]
    GroupTooLarge(usize),
    #[error("`{0}` is not a camera with a pixel resolution and field of view")]
    NotACamera(String),
}

/// Whether `point` lies inside the sensor's frustum. Boundaries are inclusive.
///
/// Sensors with a full 360 degree azimuth only apply the elevation and range tests.
pub fn frustum_contains(sensor: &Sensor, point: &Point3<f64>) -> bool {
    Viewer::new(sensor, &[]).is_some_and(|v| v.in_frustum(point))
}

/// Whether the open segment `origin -> target` crosses any occluder.
pub fn occluded(origin: &Point3<f64>, target: &Point3<f64>, occluders: &[OrientedBox]) -> bool {
    occluders.iter().any(|b| b.blocks_segment(origin, target))
}

/// A sensor prepared for repeated visibility queries.
struct Viewer<'a> {
    origin: Point3<f64>,
    rotation: Rotation3<f64>,
    range: f64,
    half_azimuth: f64,
    half_elevation: f64,
    full_azimuth: bool,
    occluders: Vec<&'a OrientedBox>,
}

impl<'a> Viewer<'a> {
    fn new(sensor: &Sensor, occluders: &'a [OrientedBox]) -> Option<Self> {
        let fov = sensor.fov?;
        let origin = sensor.pose.position;
        Some(Viewer {
            origin,
            rotation: sensor.pose.rotation(),
            range: fov.max_range_m,
            half_azimuth: fov.azimuth.half_radians(),
            half_elevation: fov.elevation.half_radians(),
            full_azimuth: fov.is_full_azimuth(),
            occluders: occluders
                .iter()
                .filter(|b| !b.contains_within(&origin, SELF_OCCLUSION_MARGIN_M))
                .collect(),
        })
    }

    fn in_frustum(&self, p: &Point3<f64>) -> bool {
        let d = p - self.origin;
        if d.norm() > self.range {
            return false;
        }
        let local = self.rotation.inverse_transform_vector(&d);
        let horizontal = local.x.hypot(local.y);
        if local.z.abs().atan2(horizontal) > self.half_elevation {
            return false;
        }
        self.full_azimuth || local.y.abs().atan2(local.x) <= self.half_azimuth
    }

    fn sees(&self, p: &Point3<f64>) -> bool {
        self.in_frustum(p) && !self.occluders.iter().any(|b| b.blocks_segment(&self.origin, p))
    }
}

/// Horizontal analysis grid parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub query_height_m: f64,
    /// Half-width of the square grid around the vehicle origin.
    pub extent_m: f64,
    pub cell_m: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            query_height_m: 1.0,
            extent_m: 30.0,
            cell_m: 0.1,
        }
    }
}

impl GridSpec {
    /// Cells along one side. Exact ratios are not rounded up by representation error.
    pub fn cells_per_side(&self) -> usize {
        let r = 2.0 * self.extent_m / self.cell_m;
        let n = if (r - r.round()).abs() <= 1e-9 * r.max(1.0) {
            r.round()
        } else {
            r.ceil()
        };
        (n as usize).max(1)
    }

    fn check(&self) -> Result<(), CoverageError> {
        let ok = self.cell_m > 0.0
            && self.extent_m > self.cell_m
            && self.extent_m.is_finite()
            && self.query_height_m.is_finite();
        if ok {
            Ok(())
        } else {
            Err(CoverageError::InvalidGrid {
                extent_m: self.extent_m,
                cell_m: self.cell_m,
            })
        }
    }
}

/// Per-cell covering sets on a square grid centered on the vehicle origin.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageGrid {
    /// Lower-left corner, metres.
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    pub query_height: f64,
    /// Bit `i` of a cell mask refers to `sensor_ids[i]`.
    pub sensor_ids: Vec<String>,
    pub cells: Vec<u64>,
    /// Cells whose center lies in an occluder footprint.
    pub interior: Vec<bool>,
}

/// Center coordinate of cell `i` of `n`. Symmetric about zero to the last bit.
fn axis_center(i: usize, n: usize, cell: f64) -> f64 {
    (i as f64 - (n as f64 - 1.0) * 0.5) * cell
}

impl CoverageGrid {
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            axis_center(i, self.width, self.cell_size),
            axis_center(j, self.height, self.cell_size),
        ]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn count(&self, idx: usize) -> u32 {
        self.cells[idx].count_ones()
    }

    pub fn sensors_at(&self, idx: usize) -> Vec<&str> {
        let mask = self.cells[idx];
        self.sensor_ids
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1u64 << b) != 0)
            .map(|(_, id)| id.as_str())
            .collect()
    }

    pub fn half_width(&self) -> f64 {
        self.width.min(self.height) as f64 * self.cell_size * 0.5
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }
}

/// Coverage grid of an explicit sensor list.
pub fn coverage_grid_of(
    sensors: &[&Sensor],
    occluders: &[OrientedBox],
    spec: &GridSpec,
) -> Result<CoverageGrid, CoverageError> {
    spec.check()?;
    if sensors.len() > 64 {
        return Err(CoverageError::GroupTooLarge(sensors.len()));
    }
    let n = spec.cells_per_side();
    let viewers: Vec<(u64, Viewer<'_>)> = sensors
        .iter()
        .enumerate()
        .filter_map(|(b, s)| Viewer::new(s, occluders).map(|v| (1u64 << b, v)))
        .collect();
    let h = spec.query_height_m;
    let cell = spec.cell_m;

    let row = |j: usize| -> Vec<(u64, bool)> {
        let y = axis_center(j, n, cell);
        (0..n)
            .map(|i| {
                let x = axis_center(i, n, cell);
                let p = Point3::new(x, y, h);
                let mask = viewers
                    .iter()
                    .filter(|(_, v)| v.sees(&p))
                    .fold(0u64, |m, (bit, _)| m | bit);
                let interior = occluders.iter().any(|b| b.footprint_contains(x, y));
                (mask, interior)
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<(u64, bool)>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<(u64, bool)>> = (0..n).map(row).collect();

    let (cells, interior) = rows.into_iter().flatten().unzip();
    let half = n as f64 * cell * 0.5;
    Ok(CoverageGrid {
        origin: [-half, -half],
        cell_size: cell,
        width: n,
        height: n,
        query_height: h,
        sensor_ids: sensors.iter().map(|s| s.id.clone()).collect(),
        cells,
        interior,
    })
}

/// Coverage grid of one modality group of a rig.
pub fn coverage_grid(
    rig: &RigSpec,
    group: Modality,
    spec: &GridSpec,
) -> Result<CoverageGrid, CoverageError> {
    let sensors: Vec<&Sensor> = rig.group(group).collect();
    coverage_grid_of(&sensors, &rig.vehicle.occluders, spec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageSummary {
    pub radius_m: f64,
    pub cell_area_m2: f64,
    /// In-radius cells outside the vehicle footprint.
    pub in_radius_cells: usize,
    pub covered_area_m2: f64,
    pub blind_area_m2: f64,
    pub interior_area_m2: f64,
    /// `k_histogram[k]` counts in-radius cells covered by exactly `k` sensors.
    pub k_histogram: Vec<usize>,
}

impl CoverageSummary {
    pub fn blind_cells(&self) -> usize {
        self.k_histogram.first().copied().unwrap_or(0)
    }
}

/// Covered and blind area within `radius_m` of the origin, from cell counts.
/// Cells inside the vehicle footprint are accounted separately.
pub fn blind_spot_area(grid: &CoverageGrid, radius_m: f64) -> Result<CoverageSummary, CoverageError> {
    let half_width = grid.half_width();
    if !(radius_m > 0.0) || radius_m > half_width {
        return Err(CoverageError::RadiusOutOfGrid {
            radius_m,
            half_width_m: half_width,
        });
    }
    let mut hist = vec![0usize; grid.sensor_ids.len() + 1];
    let mut interior = 0usize;
    for j in 0..grid.height {
        for i in 0..grid.width {
            let [x, y] = grid.center(i, j);
            if x.hypot(y) > radius_m {
                continue;
            }
            let idx = grid.index(i, j);
            if grid.interior[idx] {
                interior += 1;
            } else {
                hist[grid.count(idx) as usize] += 1;
            }
        }
    }
    let area = grid.cell_area();
    let in_radius: usize = hist.iter().sum();
    Ok(CoverageSummary {
        radius_m,
        cell_area_m2: area,
        in_radius_cells: in_radius,
        covered_area_m2: (in_radius - hist[0]) as f64 * area,
        blind_area_m2: hist[0] as f64 * area,
        interior_area_m2: interior as f64 * area,
        k_histogram: hist,
    })
}

/// A maximal run of uncovered azimuth samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AzimuthGap {
    pub start_rad: f64,
    /// Angle of the last uncovered sample; exceeds 2 pi when the gap wraps.
    pub end_rad: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AzimuthalCoverage {
    pub radius_m: f64,
    pub query_height_m: f64,
    pub step_rad: f64,
    pub samples: usize,
    pub covered: usize,
    pub fraction: f64,
    pub gaps: Vec<AzimuthGap>,
}

impl AzimuthalCoverage {
    /// Total uncovered angle, in samples times step.
    pub fn gap_rad(&self) -> f64 {
        self.gaps.iter().map(|g| g.samples).sum::<usize>() as f64 * self.step_rad
    }

    pub fn is_complete(&self) -> bool {
        self.covered == self.samples
    }
}

pub fn azimuthal_coverage_of(
    sensors: &[&Sensor],
    occluders: &[OrientedBox],
    radius_m: f64,
    query_height_m: f64,
    step_rad: f64,
) -> Result<AzimuthalCoverage, CoverageError> {
    if !(radius_m > 0.0 && step_rad > 0.0) || !radius_m.is_finite() {
        return Err(CoverageError::InvalidSweep { radius_m, step_rad });
    }
    let tau = std::f64::consts::TAU;
    let n = ((tau / step_rad) - 1e-9).ceil().max(1.0) as usize;
    let viewers: Vec<Viewer<'_>> = sensors.iter().filter_map(|s| Viewer::new(s, occluders)).collect();
    let covered: Vec<bool> = (0..n)
        .map(|k| {
            let theta = k as f64 * step_rad;
            let p = Point3::new(radius_m * theta.cos(), radius_m * theta.sin(), query_height_m);
            viewers.iter().any(|v| v.sees(&p))
        })
        .collect();
    let hits = covered.iter().filter(|c| **c).count();
    Ok(AzimuthalCoverage {
        radius_m,
        query_height_m,
        step_rad,
        samples: n,
        covered: hits,
        fraction: hits as f64 / n as f64,
        gaps: gap_runs(&covered, step_rad),
    })
}

fn gap_runs(covered: &[bool], step: f64) -> Vec<AzimuthGap> {
    let n = covered.len();
    let Some(first_covered) = covered.iter().position(|c| *c) else {
        return vec![AzimuthGap {
            start_rad: 0.0,
            end_rad: (n - 1) as f64 * step,
            samples: n,
        }];
    };
    // walk once around the circle starting on a covered sample so a wrapping
    // run is seen as one
    let mut gaps = Vec::new();
    let mut run_start: Option<usize> = None;
    for offset in 1..=n {
        let k = first_covered + offset;
        if covered[k % n] {
            if let Some(s) = run_start.take() {
                gaps.push((s, k - s));
            }
        } else if run_start.is_none() {
            run_start = Some(k);
        }
    }
    let mut gaps: Vec<AzimuthGap> = gaps
        .into_iter()
        .map(|(s, len)| {
            let start = s % n;
            AzimuthGap {
                start_rad: start as f64 * step,
                end_rad: (start + len - 1) as f64 * step,
                samples: len,
            }
        })
        .collect();
    gaps.sort_by(|a, b| a.start_rad.total_cmp(&b.start_rad));
    gaps
}

pub fn azimuthal_coverage(
    rig: &RigSpec,
    group: Modality,
    radius_m: f64,
    query_height_m: f64,
    step_rad: f64,
) -> Result<AzimuthalCoverage, CoverageError> {
    let sensors: Vec<&Sensor> = rig.group(group).collect();
    azimuthal_coverage_of(&sensors, &rig.vehicle.occluders, radius_m, query_height_m, step_rad)
}

/// Angle at `target` between the directions to the two sensor apertures.
pub fn parallax_angle(a: &Sensor, b: &Sensor, target: &Point3<f64>) -> f64 {
    let va: Vector3<f64> = a.pose.position - target;
    let vb: Vector3<f64> = b.pose.position - target;
    va.cross(&vb).norm().atan2(va.dot(&vb))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

/// Distortion-free pinhole derived from the camera's FOV and image size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pinhole {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl Pinhole {
    pub fn of(camera: &Sensor) -> Result<Self, CoverageError> {
        let not_camera = || CoverageError::NotACamera(camera.id.clone());
        if camera.modality != Modality::Camera {
            return Err(not_camera());
        }
        let (Some(fov), Some(Resolution::Pixels { width, height })) = (camera.fov, camera.resolution) else {
            return Err(not_camera());
        };
        let (w, h) = (f64::from(width), f64::from(height));
        Ok(Pinhole {
            fx: (w / 2.0) / fov.azimuth.half_radians().tan(),
            fy: (h / 2.0) / fov.elevation.half_radians().tan(),
            cx: w / 2.0,
            cy: h / 2.0,
            width: w,
            height: h,
        })
    }
}

/// Projects a vehicle-frame point into the camera image.
///
/// Image u grows to the camera's right (-y), v grows downward (-z). Returns
/// `None` for points behind the image plane, beyond range, or off the sensor.
pub fn project_point(camera: &Sensor, point: &Point3<f64>) -> Result<Option<Pixel>, CoverageError> {
    let k = Pinhole::of(camera)?;
    let range = camera.fov.map_or(0.0, |f| f.max_range_m);
    if (point - camera.pose.position).norm() > range {
        return Ok(None);
    }
    let local = camera.pose.to_local(point);
    if local.x <= 0.0 {
        return Ok(None);
    }
    let u = k.cx - k.fx * (local.y / local.x);
    let v = k.cy - k.fy * (local.z / local.x);
    let inside = (-PIXEL_EDGE_TOLERANCE..=k.width + PIXEL_EDGE_TOLERANCE).contains(&u)
        && (-PIXEL_EDGE_TOLERANCE..=k.height + PIXEL_EDGE_TOLERANCE).contains(&v);
    Ok(inside.then_some(Pixel { u, v }))
}

/// Inverse of [`project_point`] for a known depth along the optical axis.
pub fn unproject_pixel(camera: &Sensor, pixel: Pixel, depth_m: f64) -> Result<Point3<f64>, CoverageError> {
    let k = Pinhole::of(camera)?;
    let local = Vector3::new(
        depth_m,
        (k.cx - pixel.u) * depth_m / k.fx,
        (k.cy - pixel.v) * depth_m / k.fy,
    );
    Ok(camera.pose.to_vehicle(&local))
}
