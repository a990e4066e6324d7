use std::fmt::Write as _;

use super::{AzimuthalCoverage, CoverageGrid, CoverageSummary};

impl CoverageGrid {
    /// Binary graymap, one byte per cell holding `min(k, 255)`. The first image
    /// row is the grid row with the largest y, so +x points right and +y up.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        for j in (0..self.height).rev() {
            for i in 0..self.width {
                out.push(self.count(self.index(i, j)).min(255) as u8);
            }
        }
        out
    }

    /// One line per cell: center, count, interior flag and the covering sensors
    /// separated by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_m,y_m,k,interior,sensors\n");
        for j in 0..self.height {
            for i in 0..self.width {
                let idx = self.index(i, j);
                let [x, y] = self.center(i, j);
                let _ = writeln!(
                    out,
                    "{x},{y},{},{},{}",
                    self.count(idx),
                    u8::from(self.interior[idx]),
                    self.sensors_at(idx).join(";")
                );
            }
        }
        out
    }
}

impl CoverageSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "radius_m = {}", self.radius_m);
        let _ = writeln!(out, "cell_area_m2 = {:.4}", self.cell_area_m2);
        let _ = writeln!(out, "in_radius_cells = {}", self.in_radius_cells);
        let _ = writeln!(out, "covered_area_m2 = {:.4}", self.covered_area_m2);
        let _ = writeln!(out, "blind_area_m2 = {:.4}", self.blind_area_m2);
        let _ = writeln!(out, "interior_area_m2 = {:.4}", self.interior_area_m2);
        let hist: Vec<String> = self.k_histogram.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "k_histogram = [{}]", hist.join(", "));
        out
    }
}

impl AzimuthalCoverage {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "radius_m = {}", self.radius_m);
        let _ = writeln!(out, "query_height_m = {}", self.query_height_m);
        let _ = writeln!(out, "step_deg = {}", self.step_rad.to_degrees());
        let _ = writeln!(out, "samples = {}", self.samples);
        let _ = writeln!(out, "fraction = {}", self.fraction);
        let _ = writeln!(out, "gap_total_deg = {:.3}", self.gap_rad().to_degrees());
        let gaps: Vec<String> = self
            .gaps
            .iter()
            .map(|g| format!("[{:.3}, {:.3}]", g.start_rad.to_degrees(), g.end_rad.to_degrees()))
            .collect();
        let _ = writeln!(out, "gaps_deg = [{}]", gaps.join(", "));
        out
    }
}
