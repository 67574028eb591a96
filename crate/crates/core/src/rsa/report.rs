use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{compare, differences, ComparisonResult, RsaConfig, ScoreSeries};
use crate::error::Result;
use crate::stats::{mean, sample_sd};

pub const HISTOGRAM_BINS: usize = 30;

/// Equal-width bins over `[−r, r]`, `r` the largest absolute difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl DifferenceHistogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        let r = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let r = if r > 0.0 { r } else { 1.0 };
        let width = 2.0 * r / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| -r + k as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for v in values {
            let k = (((v + r) / width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        DifferenceHistogram { edges, counts }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower,upper,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(out, "{},{},{c}", self.edges[k], self.edges[k + 1]).unwrap();
        }
        out
    }

    /// Stand-alone bar chart with a marker at zero.
    pub fn to_svg(&self, title: &str) -> String {
        let (w, h, pad) = (640.0, 360.0, 40.0);
        let plot_w = w - 2.0 * pad;
        let plot_h = h - 2.0 * pad;
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let bar_w = plot_w / self.counts.len() as f64;
        let lo = self.edges[0];
        let hi = *self.edges.last().unwrap();

        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
        writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, w / 2.0, escape(title)).unwrap();
        for (k, &c) in self.counts.iter().enumerate() {
            let bh = plot_h * c as f64 / max;
            let x = pad + k as f64 * bar_w;
            let y = pad + plot_h - bh;
            writeln!(
                s,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{bh:.2}" fill="#4c72b0" stroke="white" stroke-width="0.5"/>"##,
                bar_w
            )
            .unwrap();
        }
        let zero_x = pad + plot_w * (0.0 - lo) / (hi - lo);
        writeln!(s, r#"<line x1="{zero_x:.2}" y1="{pad}" x2="{zero_x:.2}" y2="{}" stroke="black" stroke-dasharray="4 3"/>"#, pad + plot_h).unwrap();
        writeln!(s, r#"<line x1="{pad}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#, pad + plot_h, pad + plot_w).unwrap();
        let label_y = h - pad / 2.0;
        writeln!(s, r#"<text x="{pad}" y="{label_y}" font-family="sans-serif" font-size="11" text-anchor="middle">{lo:.3}</text>"#).unwrap();
        writeln!(s, r#"<text x="{zero_x:.2}" y="{label_y}" font-family="sans-serif" font-size="11" text-anchor="middle">0</text>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="{label_y}" font-family="sans-serif" font-size="11" text-anchor="middle">{hi:.3}</text>"#, pad + plot_w).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, pad - 4.0, pad + 4.0, max as u64).unwrap();
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    #[serde(flatten)]
    pub result: ComparisonResult,
    pub histogram: DifferenceHistogram,
}

/// Machine-readable summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsaReport {
    pub config: RsaConfig,
    pub reference: String,
    pub hypotheses: Vec<HypothesisSummary>,
    pub comparisons: Vec<PairwiseComparison>,
}

impl RsaReport {
    /// Summaries for every series and a comparison for every pair `i < j`.
    pub fn build(reference: &str, series: &[ScoreSeries], config: RsaConfig) -> Result<Self> {
        let hypotheses = series
            .iter()
            .map(|s| HypothesisSummary {
                name: s.hypothesis.clone(),
                mean: mean(&s.scores),
                sd: if s.scores.len() > 1 { sample_sd(&s.scores) } else { 0.0 },
                min: s.scores.iter().copied().fold(f64::INFINITY, f64::min),
                max: s.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect();
        let mut comparisons = Vec::new();
        for i in 0..series.len() {
            for j in i + 1..series.len() {
                let result = compare(&series[i], &series[j])?;
                let histogram = DifferenceHistogram::new(&differences(&series[i], &series[j])?, HISTOGRAM_BINS);
                comparisons.push(PairwiseComparison { result, histogram });
            }
        }
        Ok(RsaReport { config, reference: reference.to_string(), hypotheses, comparisons })
    }

    /// Plain-text table: means, then one line per comparison.
    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "reference: {}  (n = {}, m = {}, seed = {})", self.reference, self.config.n, self.config.m, self.config.seed).unwrap();
        for h in &self.hypotheses {
            writeln!(out, "  {:<24} mean {:.3}  sd {:.3}", h.name, h.mean, h.sd).unwrap();
        }
        for c in &self.comparisons {
            let r = &c.result;
            writeln!(
                out,
                "  {} vs {}: +{} -{} ={}  p = {:.3e}  favours {}",
                r.first,
                r.second,
                r.positive,
                r.negative,
                r.zero,
                r.p_value,
                match r.direction {
                    super::Direction::First => r.first.as_str(),
                    super::Direction::Second => r.second.as_str(),
                    super::Direction::Neither => "neither",
                }
            )
            .unwrap();
        }
        out
    }
}

/// One row per sample: index, a score per hypothesis, then the sample's ids.
pub fn scores_csv(series: &[ScoreSeries]) -> String {
    let mut out = String::from("sample");
    for s in series {
        write!(out, ",{}", s.hypothesis).unwrap();
    }
    out.push_str(",sentence_ids\n");
    let m = series.first().map_or(0, |s| s.scores.len());
    for j in 0..m {
        write!(out, "{j}").unwrap();
        for s in series {
            write!(out, ",{}", s.scores[j]).unwrap();
        }
        let ids: Vec<String> = series[0].samples[j].iter().map(u32::to_string).collect();
        writeln!(out, ",{}", ids.join(" ")).unwrap();
    }
    out
}
