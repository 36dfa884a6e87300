use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cloud::BoundingBox3D;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// The box label carries the detector's class name.
    pub bbox: BoundingBox3D,
    pub confidence: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox3D, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidBox(format!("confidence {confidence} outside [0, 1]")));
        }
        Ok(Self { bbox, confidence })
    }

    /// Car-like classes: `car` or `vehicle`, case-insensitive.
    pub fn is_vehicle(&self) -> bool {
        is_vehicle_class(self.bbox.label())
    }
}

pub fn is_vehicle_class(class: &str) -> bool {
    class.eq_ignore_ascii_case("car") || class.eq_ignore_ascii_case("vehicle")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    pub frame_id: String,
    pub detector: String,
    pub detections: Vec<Detection>,
}

#[derive(Serialize, Deserialize)]
struct BoxRecord {
    cx: f64,
    cy: f64,
    cz: f64,
    l: f64,
    w: f64,
    h: f64,
    yaw: f64,
    score: f64,
    class: String,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord<B> {
    frame_id: String,
    detector: String,
    boxes: Vec<B>,
}

impl DetectionSet {
    pub fn new(frame_id: impl Into<String>, detector: impl Into<String>, detections: Vec<Detection>) -> Self {
        Self {
            frame_id: frame_id.into(),
            detector: detector.into(),
            detections,
        }
    }

    pub fn to_json(&self) -> String {
        let record = FrameRecord {
            frame_id: self.frame_id.clone(),
            detector: self.detector.clone(),
            boxes: self
                .detections
                .iter()
                .map(|d| {
                    let c = d.bbox.center();
                    BoxRecord {
                        cx: c.x,
                        cy: c.y,
                        cz: c.z,
                        l: d.bbox.length(),
                        w: d.bbox.width(),
                        h: d.bbox.height(),
                        yaw: d.bbox.yaw(),
                        score: d.confidence,
                        class: d.bbox.label().to_string(),
                    }
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&record).expect("serializable");
        s.push('\n');
        s
    }

    /// Parses one interchange record. Invalid boxes are skipped and
    /// described in the returned warnings; a malformed envelope is an error.
    pub fn from_json(text: &str) -> std::result::Result<(Self, Vec<String>), String> {
        let record: FrameRecord<Value> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut warnings = Vec::new();
        let mut detections = Vec::with_capacity(record.boxes.len());
        for (i, raw) in record.boxes.into_iter().enumerate() {
            let parsed = serde_json::from_value::<BoxRecord>(raw)
                .map_err(|e| e.to_string())
                .and_then(|b| {
                    let bbox = BoundingBox3D::new([b.cx, b.cy, b.cz], [b.l, b.w, b.h], b.yaw, b.class)
                        .map_err(|e| e.to_string())?;
                    Detection::new(bbox, b.score).map_err(|e| e.to_string())
                });
            match parsed {
                Ok(d) => detections.push(d),
                Err(e) => warnings.push(format!("box {i}: {e}")),
            }
        }
        Ok((Self::new(record.frame_id, record.detector, detections), warnings))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<(Self, Vec<String>)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|reason| Error::malformed(path, reason))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set() -> DetectionSet {
        let b = BoundingBox3D::new([10.0, -1.25, -0.8], [3.9, 1.6, 1.5], 0.1, "Car").unwrap();
        let p = BoundingBox3D::new([5.0, 3.0, -0.9], [0.8, 0.6, 1.7], -1.0, "Pedestrian").unwrap();
        DetectionSet::new("000007", "mock", vec![Detection::new(b, 0.5).unwrap(), Detection::new(p, 0.93).unwrap()])
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let s = set();
        let (back, warnings) = DetectionSet::from_json(&s.to_json()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(back, s);
        assert_eq!(back.detections[0].confidence, 0.5);
    }

    #[test]
    fn empty_box_list() {
        let (s, w) = DetectionSet::from_json(r#"{"frame_id":"1","detector":"x","boxes":[]}"#).unwrap();
        assert!(s.detections.is_empty() && w.is_empty());
    }

    #[test]
    fn bad_boxes_become_warnings() {
        let text = r#"{"frame_id":"1","detector":"x","boxes":[
            {"cx":0,"cy":0,"cz":0,"l":1,"w":1,"h":1,"yaw":0,"score":1.5,"class":"Car"},
            {"cx":0,"cy":0,"cz":0,"l":0,"w":1,"h":1,"yaw":0,"score":0.5,"class":"Car"},
            {"cx":0,"cy":0,"cz":0,"l":1,"w":1,"h":1,"yaw":0,"class":"Car"},
            {"cx":0,"cy":0,"cz":0,"l":1,"w":1,"h":1,"yaw":0,"score":0.7,"class":"car"}]}"#;
        let (s, w) = DetectionSet::from_json(text).unwrap();
        assert_eq!(s.detections.len(), 1);
        assert_eq!(w.len(), 3);
        assert!(s.detections[0].is_vehicle());
        assert!(DetectionSet::from_json("{\"boxes\": []}").is_err());
    }
}
