use crate::error::{Error, Result};
use crate::mfi::Band;
use crate::pixelcore::{hsv_value, rgb_to_gray, sobel_magnitude, GrayImage, RgbFrame};

/// z-value of the two-sided 95% normal confidence interval.
const CI_Z: f64 = 1.96;

/// Mean, second and third central moments, and the 95% confidence
/// interval of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub second_moment: f64,
    pub third_moment: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl SampleStats {
    /// # Panics
    /// Panics on an empty sample.
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "statistics of an empty sample");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m3) = (0.0, 0.0);
        for &v in values {
            let d = v - mean;
            m2 += d * d;
            m3 += d * d * d;
        }
        m2 /= n;
        m3 /= n;
        if values.len() == 1 || m2 == 0.0 {
            return SampleStats {
                mean,
                second_moment: 0.0,
                third_moment: 0.0,
                ci_lower: mean,
                ci_upper: mean,
            };
        }
        let half = CI_Z * m2.sqrt() / n.sqrt();
        SampleStats {
            mean,
            second_moment: m2,
            third_moment: m3,
            ci_lower: mean - half,
            ci_upper: mean + half,
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.mean, self.second_moment, self.third_moment, self.ci_lower, self.ci_upper]
    }
}

/// Ten-value descriptor of a candidate band: statistics of the HSV value
/// channel followed by statistics of the Sobel edge picture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandFeatures {
    pub hsv_stats: SampleStats,
    pub edge_stats: SampleStats,
}

impl BandFeatures {
    pub fn to_array(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        out[..5].copy_from_slice(&self.hsv_stats.to_array());
        out[5..].copy_from_slice(&self.edge_stats.to_array());
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandAxis {
    Row,
    Column,
}

/// Precomputed value channel and edge picture of a frame, so several bands
/// of the same frame share one conversion.
#[derive(Clone, Debug)]
pub struct FramePlanes {
    pub value: Vec<f64>,
    pub edges: GrayImage,
}

impl FramePlanes {
    pub fn new(frame: &RgbFrame) -> Result<Self> {
        Ok(FramePlanes {
            value: frame.pixels.data().iter().map(|&p| hsv_value(p).v).collect(),
            edges: sobel_magnitude(&rgb_to_gray(frame))?,
        })
    }

    pub fn band_features(&self, axis: BandAxis, band: Band) -> Result<BandFeatures> {
        self.band_features_within(axis, band, &[])
    }

    /// Like [`band_features`](Self::band_features), but only pixels that
    /// also lie in one of the `across` bands of the other axis are used;
    /// an empty list means the whole extent.
    pub fn band_features_within(&self, axis: BandAxis, band: Band, across: &[Band]) -> Result<BandFeatures> {
        let (w, h) = (self.edges.width(), self.edges.height());
        let (limit, other) = match axis {
            BandAxis::Row => (h, w),
            BandAxis::Column => (w, h),
        };
        if band.start > band.end || band.end >= limit {
            return Err(Error::argument(format!("{axis:?} band {band:?} outside 0..{limit}")));
        }
        if let Some(r) = across.iter().find(|r| r.start > r.end || r.end >= other) {
            return Err(Error::argument(format!("crossing band {r:?} outside 0..{other}")));
        }
        let whole = [Band::new(0, other - 1)];
        let across = if across.is_empty() { &whole[..] } else { across };
        let mut v = Vec::new();
        let mut e = Vec::new();
        for i in band.start..=band.end {
            for j in across.iter().flat_map(|r| r.start..=r.end) {
                let (x, y) = match axis {
                    BandAxis::Row => (j, i),
                    BandAxis::Column => (i, j),
                };
                v.push(self.value[y * w + x]);
                e.push(*self.edges.get(x, y) as f64);
            }
        }
        Ok(BandFeatures {
            hsv_stats: SampleStats::of(&v),
            edge_stats: SampleStats::of(&e),
        })
    }
}

/// Features of the pixels in one row or column band of `frame`.
pub fn band_features(frame: &RgbFrame, axis: BandAxis, band: Band) -> Result<BandFeatures> {
    FramePlanes::new(frame)?.band_features(axis, band)
}
