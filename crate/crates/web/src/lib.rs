//! Browser bindings: ground coverage maps with sensors switched on and off,
//! the azimuthal sweep around the vehicle, and a battery state-of-charge trace.

use std::collections::BTreeSet;

use rigplan::coverage::{azimuthal_coverage_of, blind_spot_area, coverage_grid_of, GridSpec};
use rigplan::power::{bundled_profile, simulate_soc, LoadProfile};
use rigplan::{bundled_rig, parse_rig, Modality, RigSpec, Sensor};
use wasm_bindgen::prelude::*;

const PALETTE: [[u8; 3]; 5] = [
    [178, 34, 34],
    [244, 164, 96],
    [154, 205, 50],
    [46, 139, 87],
    [0, 100, 0],
];
const INTERIOR: [u8; 3] = [90, 90, 110];

#[wasm_bindgen]
pub struct Demo {
    rig: RigSpec,
    disabled: BTreeSet<String>,
    width: usize,
    summary: String,
}

impl Demo {
    pub fn from_toml(text: Option<&str>) -> Result<Demo, String> {
        let rig = match text {
            Some(t) => parse_rig(t).map_err(|e| e.to_string())?,
            None => bundled_rig(),
        };
        Ok(Demo {
            rig,
            disabled: BTreeSet::new(),
            width: 0,
            summary: String::new(),
        })
    }

    fn active(&self, group: &str) -> Result<Vec<&Sensor>, String> {
        let g: Modality = group.parse()?;
        Ok(self
            .rig
            .group(g)
            .filter(|s| !self.disabled.contains(&s.id))
            .collect())
    }

    pub fn group_sensors(&self, group: &str) -> Result<Vec<String>, String> {
        let g: Modality = group.parse()?;
        Ok(self.rig.group(g).map(|s| s.id.clone()).collect())
    }

    pub fn toggle_sensor(&mut self, id: &str) -> Result<bool, String> {
        if self.rig.sensor(id).is_none() {
            return Err(format!("no sensor `{id}`"));
        }
        if self.disabled.remove(id) {
            Ok(true)
        } else {
            self.disabled.insert(id.to_owned());
            Ok(false)
        }
    }

    /// Row-major RGBA, top row first (+y up), coloured by overlap count.
    pub fn coverage_map(&mut self, group: &str, height_m: f64, extent_m: f64, cell_m: f64, radius_m: f64) -> Result<Vec<u8>, String> {
        let sensors = self.active(group)?;
        let spec = GridSpec {
            query_height_m: height_m,
            extent_m,
            cell_m,
        };
        let grid = coverage_grid_of(&sensors, &self.rig.vehicle.occluders, &spec).map_err(|e| e.to_string())?;
        let area = blind_spot_area(&grid, radius_m.min(extent_m)).map_err(|e| e.to_string())?;
        let active = sensors.len();
        let mut rgba = Vec::with_capacity(grid.width * grid.height * 4);
        for j in (0..grid.height).rev() {
            for i in 0..grid.width {
                let idx = grid.index(i, j);
                let rgb = if grid.interior[idx] {
                    INTERIOR
                } else {
                    PALETTE[(grid.count(idx) as usize).min(PALETTE.len() - 1)]
                };
                rgba.extend_from_slice(&rgb);
                rgba.push(255);
            }
        }
        self.width = grid.width;
        self.summary = format!("sensors = {active}\n{}", area.to_text());
        Ok(rgba)
    }

    /// Gap intervals as flat `[start_deg, end_deg, ...]`.
    pub fn sweep_gaps(&self, group: &str, radius_m: f64, height_m: f64, step_deg: f64) -> Result<Vec<f64>, String> {
        let sensors = self.active(group)?;
        let sweep = azimuthal_coverage_of(&sensors, &self.rig.vehicle.occluders, radius_m, height_m, step_deg.to_radians())
            .map_err(|e| e.to_string())?;
        Ok(sweep
            .gaps
            .iter()
            .flat_map(|g| [g.start_rad.to_degrees(), g.end_rad.to_degrees()])
            .collect())
    }

    /// Flat `[t_h, soc_wh, ...]` for a bundled profile or inline profile TOML.
    pub fn soc_trace(&self, profile: &str, dt_s: f64) -> Result<Vec<f64>, String> {
        let text = bundled_profile(profile).unwrap_or(profile);
        let profile = LoadProfile::parse(text).map_err(|e| e.to_string())?;
        let sys = &self.rig.power;
        let initial = profile.initial_soc_wh.unwrap_or(sys.battery.capacity_wh);
        let trace = simulate_soc(sys, &profile.segments(), dt_s, initial).map_err(|e| e.to_string())?;
        Ok(trace
            .samples
            .iter()
            .flat_map(|s| [s.t_s / 3600.0, s.soc_wh])
            .collect())
    }
}

#[wasm_bindgen]
impl Demo {
    /// The bundled rig when `rig_toml` is empty.
    #[wasm_bindgen(constructor)]
    pub fn new(rig_toml: Option<String>) -> Result<Demo, JsError> {
        let text = rig_toml.filter(|t| !t.trim().is_empty());
        Demo::from_toml(text.as_deref()).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = sensors)]
    pub fn js_sensors(&self, group: &str) -> Result<Vec<String>, JsError> {
        self.group_sensors(group).map_err(|e| JsError::new(&e))
    }

    /// Returns whether the sensor is now enabled.
    #[wasm_bindgen(js_name = toggle)]
    pub fn js_toggle(&mut self, id: &str) -> Result<bool, JsError> {
        self.toggle_sensor(id).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = coverage)]
    pub fn js_coverage(&mut self, group: &str, height_m: f64, extent_m: f64, cell_m: f64, radius_m: f64) -> Result<Vec<u8>, JsError> {
        self.coverage_map(group, height_m, extent_m, cell_m, radius_m)
            .map_err(|e| JsError::new(&e))
    }

    /// Side length in cells of the last coverage map.
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }

    #[wasm_bindgen(js_name = sweep)]
    pub fn js_sweep(&self, group: &str, radius_m: f64, height_m: f64, step_deg: f64) -> Result<Vec<f64>, JsError> {
        self.sweep_gaps(group, radius_m, height_m, step_deg)
            .map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = soc)]
    pub fn js_soc(&self, profile: &str, dt_s: f64) -> Result<Vec<f64>, JsError> {
        self.soc_trace(profile, dt_s).map_err(|e| JsError::new(&e))
    }
}
