//! Newline-delimited JSON records.
//!
//! Detection record, one per frame:
//!
//! ```text
//! {"frame_id":0,"vehicle_count":1,
//!  "clusters":[{"centroid":[x,y],"pixel_count":n,
//!               "bbox":{"min_x":..,"min_y":..,"max_x":..,"max_y":..},
//!               "radius":r}],
//!  "foreground_pixel_count":n}
//! ```
//!
//! Ground-truth record, one per synthetic frame:
//!
//! ```text
//! {"frame_id":0,"active_mover_count":2,
//!  "footprints":[{"x":..,"y":..,"width":..,"height":..}]}
//! ```

use anyhow::{Context, Result};
use motiondet::detect::DetectionResult;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn emit<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("record on line {}", i + 1)))
        .collect()
}

pub fn parse_detections(text: &str) -> Result<Vec<DetectionResult>> {
    parse(text)
}
