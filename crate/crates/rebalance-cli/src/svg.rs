//! SVG rendering of 2-D datasets and decision regions.
//!
//! The figure is an 800x600 SVG 1.1 document. Points are drawn over the
//! data bounding box padded by 10% per side; when a model is supplied, the
//! padded box is covered by a `grid_res x grid_res` lattice of cells, each
//! shaded by the predicted class of its center. Output bytes are a pure
//! function of the inputs.

use std::fmt::Write as _;

use rebalance::dataset::ClassLabel;
use rebalance::io::Model;
use rebalance::{Dataset, Error, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

const MAJORITY_POINT: &str = "#1f77b4";
const MINORITY_POINT: &str = "#d62728";
const MAJORITY_REGION: &str = "#dbe9f6";
const MINORITY_REGION: &str = "#fbe3e4";

/// Padded data bounding box: `(x0, y0, x_span, y_span)`.
pub fn padded_bounds(dataset: &Dataset) -> Result<(f64, f64, f64, f64)> {
    if dataset.d() != 2 {
        return Err(Error::Parameter(format!(
            "plotting needs exactly 2 features, got {}; project the data first (gen --pca 2)",
            dataset.d()
        )));
    }
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..dataset.n() {
        let row = dataset.row(i);
        x_min = x_min.min(row[0]);
        x_max = x_max.max(row[0]);
        y_min = y_min.min(row[1]);
        y_max = y_max.max(row[1]);
    }
    let pad = |min: f64, max: f64| {
        let range = max - min;
        let pad = if range > 0.0 { 0.1 * range } else { 1.0 };
        (min - pad, range + 2.0 * pad)
    };
    let (x0, x_span) = pad(x_min, x_max);
    let (y0, y_span) = pad(y_min, y_max);
    Ok((x0, y0, x_span, y_span))
}

/// Centers of the prediction lattice in data coordinates, row-major from
/// the bottom-left cell: cell (i, j) has center
/// `(x0 + (j + 0.5) * x_span / res, y0 + (i + 0.5) * y_span / res)`.
pub fn lattice_centers(bounds: (f64, f64, f64, f64), grid_res: usize) -> Vec<(f64, f64)> {
    let (x0, y0, x_span, y_span) = bounds;
    let res = grid_res as f64;
    let mut centers = Vec::with_capacity(grid_res * grid_res);
    for i in 0..grid_res {
        for j in 0..grid_res {
            centers.push((
                x0 + (j as f64 + 0.5) * x_span / res,
                y0 + (i as f64 + 0.5) * y_span / res,
            ));
        }
    }
    centers
}

/// Predicted class of every lattice center, in [`lattice_centers`] order.
pub fn lattice_predictions(
    dataset: &Dataset,
    model: &Model,
    grid_res: usize,
) -> Result<Vec<ClassLabel>> {
    let bounds = padded_bounds(dataset)?;
    lattice_centers(bounds, grid_res)
        .into_iter()
        .map(|(x, y)| model.predict_point(ndarray::aview1(&[x, y])))
        .collect()
}

/// Renders the scatter (and, with a model, the shaded decision regions).
pub fn render_plot(dataset: &Dataset, model: Option<&Model>, grid_res: usize) -> Result<String> {
    let bounds = padded_bounds(dataset)?;
    if model.is_some() && grid_res == 0 {
        return Err(Error::Parameter("grid resolution must be at least 1".into()));
    }
    let (x0, y0, x_span, y_span) = bounds;
    let to_px = |x: f64| (x - x0) / x_span * WIDTH;
    // SVG y grows downward.
    let to_py = |y: f64| HEIGHT - (y - y0) / y_span * HEIGHT;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);

    if let Some(model) = model {
        let labels = lattice_predictions(dataset, model, grid_res)?;
        let cell_w = WIDTH / grid_res as f64;
        let cell_h = HEIGHT / grid_res as f64;
        for (idx, label) in labels.iter().enumerate() {
            let i = idx / grid_res;
            let j = idx % grid_res;
            let fill = match label {
                ClassLabel::Majority => MAJORITY_REGION,
                ClassLabel::Minority => MINORITY_REGION,
            };
            // Cell (i, j) sits at row i from the bottom.
            let px = j as f64 * cell_w;
            let py = HEIGHT - (i + 1) as f64 * cell_h;
            let _ = writeln!(
                out,
                r#"<rect x="{px:.2}" y="{py:.2}" width="{cell_w:.2}" height="{cell_h:.2}" fill="{fill}"/>"#
            );
        }
    }

    for i in 0..dataset.n() {
        let row = dataset.row(i);
        let fill = match dataset.labels()[i] {
            ClassLabel::Majority => MAJORITY_POINT,
            ClassLabel::Minority => MINORITY_POINT,
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{fill}" fill-opacity="0.7"/>"#,
            to_px(row[0]),
            to_py(row[1])
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Region fill colors, exposed for tests that parse rendered documents.
pub fn region_fill(label: ClassLabel) -> &'static str {
    match label {
        ClassLabel::Majority => MAJORITY_REGION,
        ClassLabel::Minority => MINORITY_REGION,
    }
}
