//! Telemetry CSV, funnel plots as SVG, and a JSON metrics summary.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::attitude;
use crate::error::OutputError;
use crate::funnel::Channel;
use crate::sim::{RunReport, SimRecord, Termination};

/// Bump when the column layout changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: usize = 68;

/// Fixed telemetry header.
pub fn csv_header() -> String {
    let mut cols: Vec<String> = [
        "t",
        "p_x",
        "p_y",
        "p_z",
        "v_x",
        "v_y",
        "v_z",
        "phi",
        "theta",
        "psi",
        "omega_phi",
        "omega_theta",
        "omega_psi",
        "p_r_x",
        "p_r_y",
        "p_r_z",
        "psi_r",
        "v_r_x",
        "v_r_y",
        "v_r_z",
        "omega_r_phi",
        "omega_r_theta",
        "omega_r_psi",
        "phi_r",
        "theta_r",
        "F_z",
        "tau_phi",
        "tau_theta",
        "tau_psi",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for prefix in ["e", "rho", "xi"] {
        cols.extend(Channel::ALL.iter().map(|c| format!("{prefix}_{c}")));
    }
    cols.extend(["cond_a", "cond_b", "cond_c"].map(String::from));
    cols.join(",")
}

/// `v` in plain decimal notation with 9 significant digits.
pub fn format_decimal(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    // scientific formatting does the rounding; re-place the decimal point
    let sci = format!("{:.8e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let mut out = String::with_capacity(24);
    if v < 0.0 {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else if (exp as usize) < digits.len() - 1 {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    } else {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', exp as usize + 1 - digits.len()));
    }
    out
}

fn csv_row(r: &SimRecord, out: &mut String) {
    let d = &r.diagnostics;
    let s = &r.state;
    let (phi_r, theta_r) = attitude::tilt_to_angles(&d.tilt_ref).unwrap_or((f64::NAN, f64::NAN));
    let mut fields: Vec<f64> = Vec::with_capacity(CSV_COLUMNS);
    fields.push(r.t);
    fields.extend(s.p.iter());
    fields.extend(s.v.iter());
    fields.extend(s.eta.as_array());
    fields.extend(s.omega.iter());
    fields.extend(r.reference.p.iter());
    fields.push(r.reference.psi);
    fields.extend(d.v_r.iter());
    fields.extend(d.omega_r.iter());
    fields.extend([phi_r, theta_r, r.command.f_z]);
    fields.extend(r.command.tau.iter());
    fields.extend(r.errors_raw);
    fields.extend(r.funnel_values);
    fields.extend(d.xi);
    for (i, v) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_decimal(*v));
    }
    for flag in d.conditions.as_array() {
        out.push_str(if flag { ",1" } else { ",0" });
    }
    out.push('\n');
}

/// Writes one row per logged step under [`csv_header`].
pub fn write_csv(report: &RunReport, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", csv_header())?;
    let mut line = String::with_capacity(1024);
    for r in &report.records {
        line.clear();
        csv_row(r, &mut line);
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const MAX_POINTS: usize = 2000;

/// Self-contained SVG of `e(t)` between `+rho(t)` and `-rho(t)`.
pub fn funnel_svg(report: &RunReport, channel: Channel) -> Result<String, OutputError> {
    let first = report.records.first().ok_or(OutputError::EmptyReport)?;
    let last = report.records.last().expect("non-empty");
    let i = channel.index();

    let stride = report.records.len().div_ceil(MAX_POINTS).max(1);
    let mut samples: Vec<&SimRecord> = report.records.iter().step_by(stride).collect();
    if !std::ptr::eq(*samples.last().expect("non-empty"), last) {
        samples.push(last);
    }

    let t0 = first.t;
    let span_t = (last.t - t0).max(f64::MIN_POSITIVE);
    let y_max = samples
        .iter()
        .map(|r| r.funnel_values[i].max(r.errors_raw[i].abs()))
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
        * 1.05;
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let x = |t: f64| MARGIN_L + (t - t0) / span_t * plot_w;
    let y = |v: f64| MARGIN_T + (1.0 - (v.clamp(-y_max, y_max) + y_max) / (2.0 * y_max)) * plot_h;

    let polyline = |f: &dyn Fn(&SimRecord) -> f64| {
        let mut pts = String::with_capacity(samples.len() * 16);
        for r in &samples {
            let _ = write!(pts, "{:.3},{:.3} ", x(r.t), y(f(r)));
        }
        pts.pop();
        pts
    };

    let mut svg = String::with_capacity(samples.len() * 60);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">funnel {channel}</text>"#,
        SVG_W / 2.0
    );
    let _ = writeln!(
        svg,
        r##"<g stroke="#444" stroke-width="1"><line x1="{MARGIN_L}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{b}"/><line x1="{MARGIN_L}" y1="{z:.3}" x2="{r}" y2="{z:.3}" stroke-dasharray="4 4" stroke="#bbb"/></g>"##,
        b = SVG_H - MARGIN_B,
        r = SVG_W - MARGIN_R,
        z = y(0.0),
    );
    let label: String = format_decimal(y_max).chars().take(8).collect();
    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="12"><text x="{}" y="{}" text-anchor="middle">t [s]</text><text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">e_{channel}</text><text x="{}" y="{}" text-anchor="end">{}</text><text x="{}" y="{}" text-anchor="end">{}</text><text x="{MARGIN_L}" y="{}" text-anchor="middle">{}</text><text x="{}" y="{}" text-anchor="middle">{}</text></g>"#,
        MARGIN_L + plot_w / 2.0,
        SVG_H - 12.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_L - 6.0,
        MARGIN_T + 4.0,
        label,
        MARGIN_L - 6.0,
        SVG_H - MARGIN_B + 4.0,
        format_args!("-{label}"),
        SVG_H - MARGIN_B + 18.0,
        format_decimal(t0),
        SVG_W - MARGIN_R,
        SVG_H - MARGIN_B + 18.0,
        format_decimal(last.t),
    );
    for (id, color, series) in [
        (
            "rho_upper",
            "#d62728",
            &(|r: &SimRecord| r.funnel_values[i]) as &dyn Fn(&SimRecord) -> f64,
        ),
        ("rho_lower", "#d62728", &|r: &SimRecord| -r.funnel_values[i]),
        ("error", "#1f77b4", &|r: &SimRecord| r.errors_raw[i]),
    ] {
        let _ = writeln!(
            svg,
            r#"<polyline id="{id}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            polyline(series)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes [`funnel_svg`] for a channel given by name.
pub fn write_funnel_svg(
    report: &RunReport,
    channel: &str,
    path: impl AsRef<Path>,
) -> Result<(), OutputError> {
    let ch =
        Channel::from_name(channel).ok_or_else(|| OutputError::UnknownChannel(channel.into()))?;
    let svg = funnel_svg(report, ch)?;
    std::fs::write(path, svg)?;
    Ok(())
}

/// Summary of a run as JSON.
pub fn metrics_json(report: &RunReport) -> Value {
    let m = &report.metrics;
    let mut channels = Map::new();
    for c in Channel::ALL {
        let i = c.index();
        channels.insert(
            c.name().into(),
            json!({
                "max_abs_xi": m.max_abs_xi[i],
                "max_abs_error": m.max_abs_error[i],
                "steady_state_error": m.steady_state_error[i],
            }),
        );
    }
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| json!({ "t": v.t, "channel": v.channel.name(), "xi": finite_or_null(v.xi) }))
        .collect();
    let termination = match report.termination {
        Termination::Completed => json!({ "kind": "completed" }),
        Termination::Halted { t } => json!({ "kind": "halted", "t": t }),
        Termination::Diverged { t } => json!({ "kind": "diverged", "t": t }),
    };
    json!({
        "steps": m.steps,
        "final_time": report.records.last().map(|r| r.t),
        "compliant": report.is_compliant(),
        "termination": termination,
        "violation_count": m.violation_count,
        "violations": violations,
        "attitude_bound_ok": report.attitude_bound_ok,
        "condition_false_counts": {
            "a": m.condition_false_counts[0],
            "b": m.condition_false_counts[1],
            "c": m.condition_false_counts[2],
        },
        "channels": channels,
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn write_metrics(report: &RunReport, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let text = serde_json::to_string_pretty(&metrics_json(report))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
