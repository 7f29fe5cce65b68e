//! Study / series / ROI hierarchy with lesion-group linking.
//!
//! ROIs that share a `lesion_group_id` describe the same lesion (for example
//! the CC and MLO views of a mammogram) and always carry identical labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, RoiPolygon, Volume};

/// Geometry of one image series, enough to map voxel and patient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesGeometry {
    pub study_id: String,
    pub series_id: String,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub modality: String,
}

impl SeriesGeometry {
    pub fn of_volume(study_id: impl Into<String>, series_id: impl Into<String>, vol: &Volume) -> Self {
        Self {
            study_id: study_id.into(),
            series_id: series_id.into(),
            dims: vol.dims(),
            spacing: vol.spacing(),
            origin: vol.origin(),
            modality: vol.modality().to_string(),
        }
    }

    pub fn voxel_to_patient(&self, p: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + self.spacing[a] * p[a])
    }

    pub fn patient_to_voxel(&self, p: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| (p[a] - self.origin[a]) / self.spacing[a])
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct StudyEntry {
    series: BTreeMap<String, SeriesGeometry>,
    rois: BTreeMap<String, RoiPolygon>,
}

/// In-memory annotation catalog for any number of studies.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Annotations {
    studies: BTreeMap<String, StudyEntry>,
}

impl Annotations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_series(&mut self, geometry: SeriesGeometry) {
        let entry = self.studies.entry(geometry.study_id.clone()).or_default();
        entry.series.insert(geometry.series_id.clone(), geometry);
    }

    pub fn series(&self, series_id: &str) -> Option<&SeriesGeometry> {
        self.studies.values().find_map(|s| s.series.get(series_id))
    }

    /// Adds (or replaces) an ROI. Its series must already be registered.
    pub fn add_roi(&mut self, roi: RoiPolygon) -> Result<()> {
        roi.validate()?;
        let study = self
            .study_of_series(&roi.series_id)
            .ok_or_else(|| Error::UnknownSeries(roi.series_id.clone()))?
            .to_string();
        let entry = self.studies.get_mut(&study).expect("study exists");
        entry.rois.insert(roi.roi_id.clone(), roi);
        Ok(())
    }

    pub fn roi(&self, roi_id: &str) -> Option<&RoiPolygon> {
        self.studies.values().find_map(|s| s.rois.get(roi_id))
    }

    pub fn rois(&self) -> impl Iterator<Item = &RoiPolygon> {
        self.studies.values().flat_map(|s| s.rois.values())
    }

    pub fn study_of_roi(&self, roi_id: &str) -> Option<&str> {
        self.studies.iter().find(|(_, s)| s.rois.contains_key(roi_id)).map(|(k, _)| k.as_str())
    }

    pub fn study_of_series(&self, series_id: &str) -> Option<&str> {
        self.studies.iter().find(|(_, s)| s.series.contains_key(series_id)).map(|(k, _)| k.as_str())
    }

    /// Puts all `roi_ids` into lesion group `group_id`.
    ///
    /// Labels are merged so every member ends up with the same map; where
    /// members disagree on a label the first listed ROI wins.
    pub fn link_rois(&mut self, roi_ids: &[String], group_id: &str) -> Result<()> {
        let mut study: Option<&str> = None;
        for id in roi_ids {
            let s = self.study_of_roi(id).ok_or_else(|| Error::UnknownRoi(id.clone()))?;
            match study {
                None => study = Some(s),
                Some(prev) if prev != s => return Err(Error::CrossStudy(roi_ids.to_vec())),
                _ => {}
            }
        }
        let Some(study) = study.map(str::to_string) else {
            return Ok(());
        };
        let entry = self.studies.get_mut(&study).expect("study exists");
        // existing members of the group join the merge too
        let mut members: Vec<String> = roi_ids.to_vec();
        for (id, roi) in &entry.rois {
            if roi.lesion_group_id.as_deref() == Some(group_id) && !members.contains(id) {
                members.push(id.clone());
            }
        }
        let mut merged = BTreeMap::new();
        for id in members.iter().rev() {
            merged.extend(entry.rois[id].labels.clone());
        }
        for id in &members {
            let roi = entry.rois.get_mut(id).expect("member exists");
            roi.lesion_group_id = Some(group_id.to_string());
            roi.labels = merged.clone();
        }
        Ok(())
    }

    /// Writes a label on one ROI and every ROI linked to it.
    pub fn set_label(&mut self, roi_id: &str, name: &str, value: &str) -> Result<()> {
        let study = self.study_of_roi(roi_id).ok_or_else(|| Error::UnknownRoi(roi_id.into()))?.to_string();
        let entry = self.studies.get_mut(&study).expect("study exists");
        let group = entry.rois[roi_id].lesion_group_id.clone();
        for roi in entry.rois.values_mut() {
            let member = roi.roi_id == roi_id || (group.is_some() && roi.lesion_group_id == group);
            if member {
                roi.labels.insert(name.to_string(), value.to_string());
            }
        }
        Ok(())
    }
}
