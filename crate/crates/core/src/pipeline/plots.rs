//! Static SVG figures drawn from the pipeline's own output tables. Each
//! figure names its source file and digest in a leading comment and carries
//! the plotted values as `data-*` attributes.

use std::fmt::Write as _;
use std::fs;

use serde_json::Value;

use super::{sha256_hex, Outputs};
use crate::tsv::fmt_f64;
use crate::Result;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn read(out: &Outputs, rel: &str) -> Option<String> {
    fs::read_to_string(out.root().join(rel)).ok()
}

fn header(title: &str, sources: &[(&str, &str)]) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    for (rel, content) in sources {
        writeln!(s, "<!-- source: {rel} sha256={} -->", sha256_hex(content.as_bytes())).unwrap();
    }
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(s, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>", W / 2.0, escape(title)).unwrap();
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

fn rows(doc: &str) -> (Vec<&str>, Vec<Vec<&str>>) {
    let mut lines = doc.lines();
    let head = lines.next().map(|h| h.split('\t').collect()).unwrap_or_default();
    (head, lines.filter(|l| !l.is_empty()).map(|l| l.split('\t').collect()).collect())
}

/// Line plot of normalized PageRank entropy by year.
pub fn entropy_svg(doc: &str, source: &str) -> Option<String> {
    let (_, rs) = rows(doc);
    let pts: Vec<(i32, f64)> = rs
        .iter()
        .filter_map(|r| Some((r.first()?.parse().ok()?, r.get(1)?.parse().ok()?)))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let (x0, x1) = (pts.first()?.0 as f64, pts.last()?.0 as f64);
    let mut s = header("Normalized entropy of PageRank (positive network)", &[(source, doc)]);
    let px = |x: f64| scale(x, x0, x1, MARGIN, W - MARGIN);
    let py = |y: f64| scale(y, 0.0, 1.0, H - MARGIN, MARGIN);
    axes(&mut s, &format!("{x0}"), &format!("{x1}"), "0", "1");
    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x as f64), py(*y))).collect();
    writeln!(s, "<polyline fill=\"none\" stroke=\"#2a6f97\" stroke-width=\"2\" points=\"{}\"/>", path.join(" ")).unwrap();
    for (x, y) in &pts {
        writeln!(
            s,
            "<circle class=\"point\" data-year=\"{x}\" data-value=\"{}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#2a6f97\"/>",
            fmt_f64(*y),
            px(*x as f64),
            py(*y)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn axes(s: &mut String, x0: &str, x1: &str, y0: &str, y1: &str) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    writeln!(s, "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>").unwrap();
    writeln!(s, "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>").unwrap();
    writeln!(s, "<text x=\"{l}\" y=\"{}\" text-anchor=\"middle\">{}</text>", b + 16.0, escape(x0)).unwrap();
    writeln!(s, "<text x=\"{r}\" y=\"{}\" text-anchor=\"middle\">{}</text>", b + 16.0, escape(x1)).unwrap();
    writeln!(s, "<text x=\"{}\" y=\"{b}\" text-anchor=\"end\">{}</text>", l - 6.0, escape(y0)).unwrap();
    writeln!(s, "<text x=\"{}\" y=\"{t}\" text-anchor=\"end\">{}</text>", l - 6.0, escape(y1)).unwrap();
}

/// Block-to-block link probability heatmap for the latest year with data.
pub fn heatmap_svg(doc: &str, source: &str, sign: i8) -> Option<String> {
    let (_, rs) = rows(doc);
    let sign_s = sign.to_string();
    let cells: Vec<(i32, usize, usize, Option<f64>)> = rs
        .iter()
        .filter(|r| r.get(3) == Some(&sign_s.as_str()))
        .filter_map(|r| Some((r[0].parse().ok()?, r[1].parse().ok()?, r[2].parse().ok()?, r[4].parse().ok())))
        .collect();
    let year = cells.iter().filter(|c| c.3.is_some()).map(|c| c.0).max()?;
    let cells: Vec<_> = cells.into_iter().filter(|c| c.0 == year).collect();
    let b = cells.iter().map(|c| c.1.max(c.2)).max()? + 1;
    let name = if sign > 0 { "positive" } else { "negative" };
    let mut s = header(&format!("Community link probability, {name} edges, {year}"), &[(source, doc)]);
    let side = (H - 2.0 * MARGIN) / b as f64;
    for (_, r, c, p) in &cells {
        let shade = p.map_or(255.0, |p| 255.0 * (1.0 - p.clamp(0.0, 1.0)));
        let (red, green, blue) = if sign > 0 { (shade, shade, 255.0) } else { (255.0, shade, shade) };
        writeln!(
            s,
            "<rect class=\"cell\" data-r=\"{r}\" data-s=\"{c}\" data-value=\"{}\" x=\"{:.2}\" y=\"{:.2}\" width=\"{side:.2}\" height=\"{side:.2}\" fill=\"rgb({red:.0},{green:.0},{blue:.0})\" stroke=\"#999\"/>",
            p.map(fmt_f64).unwrap_or_else(|| "NA".into()),
            MARGIN + *c as f64 * side,
            MARGIN + *r as f64 * side,
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Some(s)
}

struct Coef {
    block: String,
    term: String,
    estimate: f64,
    low: f64,
    high: f64,
    p: f64,
}

fn coefs_from(v: &Value, block: &str, out: &mut Vec<Coef>) {
    for c in v.as_array().into_iter().flatten() {
        let g = |k: &str| c.get(k).and_then(Value::as_f64);
        let (Some(e), Some(l), Some(h)) = (g("estimate"), g("ci_low"), g("ci_high")) else { continue };
        out.push(Coef {
            block: block.to_string(),
            term: c.get("name").and_then(Value::as_str).unwrap_or("").to_string(),
            estimate: e,
            low: l,
            high: h,
            p: g("p_value").unwrap_or(f64::NAN),
        });
    }
}

/// Dot-and-whisker plot of a fitted model's coefficients with 95% intervals.
/// Significant terms (p < 0.05) are filled.
pub fn coefficient_svg(doc: &str, source: &str) -> Option<String> {
    let v: Value = serde_json::from_str(doc).ok()?;
    let mut cs = Vec::new();
    if let Some(blocks) = v.get("blocks").and_then(Value::as_array) {
        for b in blocks {
            let cat = b.get("category").map(|c| c.to_string()).unwrap_or_default();
            coefs_from(&b["coefficients"], &format!("sign {cat}"), &mut cs);
        }
    } else {
        coefs_from(v.get("coefficients")?, "", &mut cs);
    }
    if cs.is_empty() {
        return None;
    }
    let name = v.get("name").and_then(Value::as_str).unwrap_or("model");
    let lo = cs.iter().map(|c| c.low).fold(0.0_f64, f64::min);
    let hi = cs.iter().map(|c| c.high).fold(0.0_f64, f64::max);
    let mut s = header(&format!("Coefficients: {name}"), &[(source, doc)]);
    let left = 200.0;
    let px = |x: f64| scale(x, lo, hi, left, W - 20.0);
    let step = (H - 2.0 * MARGIN) / cs.len() as f64;
    writeln!(
        s,
        "<line x1=\"{0:.2}\" y1=\"{MARGIN}\" x2=\"{0:.2}\" y2=\"{1}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>",
        px(0.0),
        H - MARGIN
    )
    .unwrap();
    for (i, c) in cs.iter().enumerate() {
        let y = MARGIN + (i as f64 + 0.5) * step;
        let label = if c.block.is_empty() { c.term.clone() } else { format!("{} [{}]", c.term, c.block) };
        let color = if c.block.contains("-1") { "#c0392b" } else { "#2a6f97" };
        let fill = if c.p < 0.05 { color } else { "white" };
        writeln!(
            s,
            "<g class=\"coef\" data-term=\"{}\" data-block=\"{}\" data-estimate=\"{}\" data-ci-low=\"{}\" data-ci-high=\"{}\">",
            escape(&c.term),
            escape(&c.block),
            fmt_f64(c.estimate),
            fmt_f64(c.low),
            fmt_f64(c.high)
        )
        .unwrap();
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", left - 8.0, y + 4.0, escape(&label)).unwrap();
        writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            px(c.low),
            px(c.high)
        )
        .unwrap();
        writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{fill}\" stroke=\"{color}\"/>",
            px(c.estimate)
        )
        .unwrap();
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// Draws every figure whose inputs exist. A missing or empty table skips
/// that figure with a warning.
pub fn emit_plots(out: &mut Outputs) -> Result<()> {
    let src = "metrics/entropy_timeseries.tsv";
    match read(out, src).and_then(|d| entropy_svg(&d, src)) {
        Some(svg) => out.write("plots/entropy_timeseries.svg", &svg)?,
        None => log::warn!("{src} missing or empty; entropy plot skipped"),
    }
    let src = "communities/community_probs.tsv";
    for (sign, name) in [(1i8, "positive"), (-1, "negative")] {
        match read(out, src).and_then(|d| heatmap_svg(&d, src, sign)) {
            Some(svg) => out.write(&format!("plots/community_probs_{name}.svg"), &svg)?,
            None => log::warn!("{src} missing or empty; {name} heatmap skipped"),
        }
    }
    let mut models: Vec<String> = match fs::read_dir(out.root().join("regress")) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".json"))
            .collect(),
        Err(_) => Vec::new(),
    };
    models.sort();
    if models.is_empty() {
        log::warn!("no fitted models found; coefficient plots skipped");
    }
    for m in models {
        let rel = format!("regress/{m}");
        match read(out, &rel).and_then(|d| coefficient_svg(&d, &rel)) {
            Some(svg) => out.write(&format!("plots/coef_{}.svg", m.trim_end_matches(".json")), &svg)?,
            None => log::warn!("{rel} has no coefficients; plot skipped"),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
        let key = format!("{name}=\"");
        let i = tag.find(&key)? + key.len();
        Some(&tag[i..i + tag[i..].find('"')?])
    }

    #[test]
    fn entropy_line_has_one_point_per_row() {
        let doc = "year\th_norm\n2001\t0.5\n2002\t0.75\n2003\t0.9\n";
        let svg = entropy_svg(doc, "e.tsv").unwrap();
        let pts: Vec<&str> = svg.lines().filter(|l| l.contains("class=\"point\"")).collect();
        assert_eq!(pts.len(), 3);
        assert_eq!(attr(pts[1], "data-value"), Some("0.75"));
        assert!(svg.contains("<!-- source: e.tsv sha256="));
    }

    #[test]
    fn empty_heatmap_is_skipped() {
        assert!(heatmap_svg("year\tr\ts\tsign\tprobability\n", "c.tsv", -1).is_none());
        let doc = "year\tr\ts\tsign\tprobability\n2001\t0\t0\t-1\t0.25\n2001\t0\t1\t-1\tNA\n2001\t1\t0\t-1\t0\n2001\t1\t1\t-1\t1\n";
        let svg = heatmap_svg(doc, "c.tsv", -1).unwrap();
        assert_eq!(svg.matches("class=\"cell\"").count(), 4);
    }

    #[test]
    fn coefficient_values_parse_back() {
        let doc = r#"{"name":"m","coefficients":[
            {"name":"const","estimate":-1.08,"std_error":0.03,"statistic":-36.0,"p_value":0.0,"ci_low":-1.13,"ci_high":-1.02},
            {"name":"x","estimate":0.4,"std_error":0.12,"statistic":3.33,"p_value":0.001,"ci_low":0.16,"ci_high":0.64}]}"#;
        let svg = coefficient_svg(doc, "regress/m.json").unwrap();
        let groups: Vec<&str> = svg.lines().filter(|l| l.starts_with("<g class=\"coef\"")).collect();
        assert_eq!(groups.len(), 2);
        let v: Value = serde_json::from_str(doc).unwrap();
        for (g, c) in groups.iter().zip(v["coefficients"].as_array().unwrap()) {
            assert_eq!(attr(g, "data-term"), c["name"].as_str());
            for (a, k) in [("data-estimate", "estimate"), ("data-ci-low", "ci_low"), ("data-ci-high", "ci_high")] {
                let parsed: f64 = attr(g, a).unwrap().parse().unwrap();
                assert_eq!(parsed, c[k].as_f64().unwrap());
            }
        }
    }
}
