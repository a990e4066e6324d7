//! Naive per-cell coverage written without the library's geometry code.
//!
//! Rotations are assembled from scalar trig, occlusion uses Liang-Barsky
//! clipping and the result is a plain per-cell list of sensor ids.

use rigplan::geometry::OrientedBox;
use rigplan::Sensor;

const SELF_MARGIN: f64 = 0.01;

pub struct OracleGrid {
    pub n: usize,
    /// Row-major from the lowest y row; each entry lists covering sensor ids.
    pub cells: Vec<Vec<String>>,
    pub interior: Vec<bool>,
}

fn rotation(yaw: f64, pitch: f64, roll: f64) -> [[f64; 3]; 3] {
    let (sy, cy) = (yaw.sin(), yaw.cos());
    let (sp, cp) = (pitch.sin(), pitch.cos());
    let (sr, cr) = (roll.sin(), roll.cos());
    // Rz(yaw) * Ry(pitch) * Rx(roll)
    [
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ]
}

fn box_local(b: &OrientedBox, p: [f64; 3]) -> [f64; 3] {
    let yaw = b.yaw.radians();
    let dx = p[0] - b.center.x;
    let dy = p[1] - b.center.y;
    [
        yaw.cos() * dx + yaw.sin() * dy,
        -yaw.sin() * dx + yaw.cos() * dy,
        p[2] - b.center.z,
    ]
}

fn inside_grown(b: &OrientedBox, p: [f64; 3], margin: f64) -> bool {
    let l = box_local(b, p);
    l[0].abs() <= b.half_extents.x + margin
        && l[1].abs() <= b.half_extents.y + margin
        && l[2].abs() <= b.half_extents.z + margin
}

/// Liang-Barsky clip of the parameter interval [0, 1] against the box; the
/// open segment is blocked when a non-degenerate or interior piece survives.
fn segment_hits(b: &OrientedBox, a: [f64; 3], t: [f64; 3]) -> bool {
    let la = box_local(b, a);
    let lt = box_local(b, t);
    let half = [b.half_extents.x, b.half_extents.y, b.half_extents.z];
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for k in 0..3 {
        let d = lt[k] - la[k];
        if d == 0.0 {
            if la[k] < -half[k] || la[k] > half[k] {
                return false;
            }
        } else {
            let ta = (-half[k] - la[k]) / d;
            let tb = (half[k] - la[k]) / d;
            let (near, far) = if ta < tb { (ta, tb) } else { (tb, ta) };
            if near > lo {
                lo = near;
            }
            if far < hi {
                hi = far;
            }
        }
    }
    lo <= hi && lo < 1.0 && hi > 0.0
}

pub fn sees(sensor: &Sensor, occluders: &[OrientedBox], p: [f64; 3]) -> bool {
    let Some(fov) = sensor.fov else { return false };
    let o = [sensor.pose.position.x, sensor.pose.position.y, sensor.pose.position.z];
    let d = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
    if (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() > fov.max_range_m {
        return false;
    }
    let r = rotation(
        sensor.pose.yaw.radians(),
        sensor.pose.pitch.radians(),
        sensor.pose.roll.radians(),
    );
    // transpose times d
    let x = r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2];
    let y = r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2];
    let z = r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2];
    let elevation = z.abs().atan2((x * x + y * y).sqrt());
    if elevation > fov.elevation.radians() / 2.0 {
        return false;
    }
    if fov.azimuth.degrees() < 360.0 && y.abs().atan2(x) > fov.azimuth.radians() / 2.0 {
        return false;
    }
    for b in occluders {
        if inside_grown(b, o, SELF_MARGIN) {
            continue;
        }
        if segment_hits(b, o, p) {
            return false;
        }
    }
    true
}

pub fn grid(sensors: &[Sensor], occluders: &[OrientedBox], n: usize, cell: f64, h: f64) -> OracleGrid {
    let mut cells = Vec::with_capacity(n * n);
    let mut interior = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = (i as f64 - (n as f64 - 1.0) / 2.0) * cell;
            let y = (j as f64 - (n as f64 - 1.0) / 2.0) * cell;
            cells.push(
                sensors
                    .iter()
                    .filter(|s| sees(s, occluders, [x, y, h]))
                    .map(|s| s.id.clone())
                    .collect(),
            );
            interior.push(occluders.iter().any(|b| {
                let l = box_local(b, [x, y, b.center.z]);
                l[0].abs() <= b.half_extents.x && l[1].abs() <= b.half_extents.y
            }));
        }
    }
    OracleGrid { n, cells, interior }
}

/// Blind-area recount straight from the oracle cells.
pub fn blind_cells(g: &OracleGrid, cell: f64, radius: f64) -> (usize, usize) {
    let mut blind = 0;
    let mut in_radius = 0;
    for j in 0..g.n {
        for i in 0..g.n {
            let x = (i as f64 - (g.n as f64 - 1.0) / 2.0) * cell;
            let y = (j as f64 - (g.n as f64 - 1.0) / 2.0) * cell;
            let k = j * g.n + i;
            if (x * x + y * y).sqrt() <= radius && !g.interior[k] {
                in_radius += 1;
                if g.cells[k].is_empty() {
                    blind += 1;
                }
            }
        }
    }
    (blind, in_radius)
}
