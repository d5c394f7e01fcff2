use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::{check_input, check_output, load_polytope, Context, RunReport};
use crate::diffusion::{halftone, scaling_from_output, ColorMap, NeighborhoodScheme, ScalingReport};
use crate::dynamics::ensure_member;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::netpbm::Image;

#[derive(Debug, Clone, Args, Serialize)]
pub struct HalftoneArgs {
    /// Input P5 or P6 image.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output image (P5 for one channel, P6 for three).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Preset or polytope file; defaults to `interval` for P5 and `cube(3)` for P6.
    #[arg(long)]
    pub polytope: Option<String>,
    /// `simple`, `fs3`, `uniform12`, or a scheme file.
    #[arg(long, default_value = "simple")]
    pub scheme: String,
    /// Window sizes for the local error scaling fit, e.g. `8,16,32,64`.
    #[arg(long, value_delimiter = ',')]
    pub scaling: Vec<usize>,
    /// Window anchors per axis for the scaling fit.
    #[arg(long, default_value_t = 8)]
    pub anchors: usize,
}

pub(crate) fn load_scheme(s: &str) -> Result<NeighborhoodScheme> {
    match s.parse::<NeighborhoodScheme>() {
        Ok(sc) => Ok(sc),
        Err(e) => {
            let path = std::path::Path::new(s);
            if path.is_file() {
                NeighborhoodScheme::load(path)
            } else {
                Err(e)
            }
        }
    }
}

pub(crate) fn run(a: &HalftoneArgs, ctx: &Context, report: &mut RunReport) -> Result<()> {
    check_input(&a.input)?;
    check_output(&a.out)?;
    let img = Image::load(&a.input)?;
    let name = a
        .polytope
        .clone()
        .unwrap_or_else(|| if img.channels == 1 { "interval" } else { "cube(3)" }.to_string());
    let p = load_polytope(&name)?;
    let scheme = load_scheme(&a.scheme)?;
    let map = if name == "tristimulus" {
        ColorMap::Tristimulus
    } else {
        ColorMap::Unit
    };
    let raster = map.to_raster(&img)?;
    if raster.channels() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: raster.channels(),
        });
    }
    if ctx.strict {
        for i in 0..raster.height() {
            for j in 0..raster.width() {
                ensure_member(&p, raster.get(i, j), 1e-9)?;
            }
        }
    }
    let ht = halftone(&raster, &p, &scheme)?;
    map.render(&ht.output, &p)?.save(&a.out)?;

    let max_err = ht.errors.max_norm();
    report.metric("width", raster.width());
    report.metric("height", raster.height());
    report.metric("scheme", scheme.name());
    report.metric("vertices", p.len());
    report.metric("max_error_norm", max_err);
    report.metric("mean_input", raster.mean());
    report.metric("mean_output", ht.output.mean(&p));
    let density: Vec<f64> = p.vertex_ids().map(|v| ht.output.density(v)).collect();
    report.metric("vertex_density", density);
    report.assert(
        "error_field_finite",
        max_err.is_finite(),
        format!("max pixel error norm {max_err}"),
        &["max_error_norm"],
    );
    if scheme.name() == "simple" {
        // the residuals telescope to the error of the last pixel
        let n = raster.width() * raster.height();
        let (mi, mo) = (raster.mean(), ht.output.mean(&p));
        let gap: Vec<f64> = mi.iter().zip(&mo).map(|(x, y)| (x - y) * n as f64).collect();
        let last = ht.errors.get(raster.height() - 1, raster.width() - 1);
        let defect = norm(&gap.iter().zip(last).map(|(g, e)| g - e).collect::<Vec<_>>());
        let tol = 1e-9 * n as f64 * (1.0 + p.diameter());
        report.metric("telescoping_defect", defect);
        report.assert(
            "residuals_telescope",
            defect <= tol,
            format!("|sum(input - output) - eps_last| = {defect:.3e} (tolerance {tol:.1e})"),
            &["telescoping_defect", "mean_input", "mean_output"],
        );
    }
    if !a.scaling.is_empty() {
        let s = scaling_from_output(&raster, &ht.output, &p, scheme.name(), &a.scaling, a.anchors)?;
        assert_scaling(report, &s);
        report.metric("scaling", s);
    }
    Ok(())
}

/// Slope at most 1.2 and quadratic growth excluded by three standard errors.
/// A degenerate fit (all window errors zero to roundoff) is linear trivially.
pub(crate) fn assert_scaling(report: &mut RunReport, s: &ScalingReport) {
    let (pass, detail) = match (s.degenerate, s.slope, s.slope_stderr) {
        (true, _, _) => (
            true,
            "window errors vanish to roundoff; growth is trivially O(n)".to_string(),
        ),
        (false, Some(b), Some(se)) => (
            b <= 1.2 && (2.0 - b) >= 3.0 * se,
            format!(
                "slope {b:.4} +/- {se:.4}; quadratic is {:.1} sigma away",
                (2.0 - b) / se
            ),
        ),
        (false, Some(b), None) => (b <= 1.2, format!("slope {b:.4} (two sizes, no error estimate)")),
        (false, None, _) => (false, "no slope".to_string()),
    };
    report.assert("local_error_linear", pass, detail, &["scaling"]);
}
