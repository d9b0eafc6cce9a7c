//! Log-log plot of a power-law fit: samples, fitted line and a reference
//! line with the target slope.

use std::fmt::Write;

use anisoflow::verification::ExponentFit;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 64.0;

struct Frame {
    lx: (f64, f64),
    ly: (f64, f64),
}

impl Frame {
    fn px(&self, t: f64) -> f64 {
        MARGIN + (t.log10() - self.lx.0) / (self.lx.1 - self.lx.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT
            - MARGIN
            - (v.log10() - self.ly.0) / (self.ly.1 - self.ly.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = (lo.log10(), hi.log10());
    let pad = ((b - a) * 0.08).max(0.05);
    (a - pad, b + pad)
}

pub fn loglog_plot(title: &str, y_label: &str, fit: &ExponentFit) -> String {
    let s = &fit.fit.samples;
    let tmin = s.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let tmax = s.iter().map(|p| p.0).fold(0.0, f64::max);
    let vmin = s.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let vmax = s.iter().map(|p| p.1).fold(0.0, f64::max);
    let fr = Frame {
        lx: padded(tmin, tmax),
        ly: padded(vmin, vmax),
    };

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        o,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1) = (MARGIN, WIDTH - MARGIN);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        o,
        r#"<path d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" stroke="black" fill="none"/>"#
    );
    for d in (fr.lx.0.ceil() as i32)..=(fr.lx.1.floor() as i32) {
        let x = fr.px(10f64.powi(d));
        let _ = writeln!(
            o,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            o,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#,
            y0 + 18.0
        );
    }
    for d in (fr.ly.0.ceil() as i32)..=(fr.ly.1.floor() as i32) {
        let y = fr.py(10f64.powi(d));
        let _ = writeln!(
            o,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        o,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        o,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );

    let line = |o: &mut String, slope: f64, c: f64, colour: &str, dash: &str| {
        let (a, b) = (tmin, tmax);
        let _ = writeln!(
            o,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
            fr.px(a),
            fr.py(c * a.powf(slope)),
            fr.px(b),
            fr.py(c * b.powf(slope))
        );
    };
    line(&mut o, fit.fit.exponent, fit.fit.constant, "#1f5fbf", "");
    // the target slope drawn through the fitted value at the geometric-mean time
    let tm = (tmin * tmax).sqrt();
    let c_target = fit.fit.eval(tm) / tm.powf(fit.target);
    line(
        &mut o,
        fit.target,
        c_target,
        "#c03020",
        r#" stroke-dasharray="6 4""#,
    );
    for (t, v) in s {
        let _ = writeln!(
            o,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
            fr.px(*t),
            fr.py(*v)
        );
    }
    let _ = writeln!(
        o,
        r##"<text x="{:.2}" y="{:.2}" fill="#1f5fbf">fit slope {:.5} (r² {:.5})</text>"##,
        x0 + 10.0,
        y1 + 14.0,
        fit.fit.exponent,
        fit.fit.r_squared
    );
    let _ = writeln!(
        o,
        r##"<text x="{:.2}" y="{:.2}" fill="#c03020">target slope {:.5}</text>"##,
        x0 + 10.0,
        y1 + 30.0,
        fit.target
    );
    o.push_str("</svg>\n");
    o
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use anisoflow::verification::fit_power_law;

    #[test]
    fn plot_contains_every_sample_and_both_lines() {
        let samples: Vec<(f64, f64)> = (1..=8)
            .map(|k| (k as f64, (k as f64).powf(-0.25)))
            .collect();
        let fit = ExponentFit {
            fit: fit_power_law(&samples).unwrap(),
            target: -0.25,
        };
        let svg = loglog_plot("decay <N=1>", "max u", &fit);
        assert_eq!(svg.matches("<circle").count(), 8);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("decay &lt;N=1&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg, loglog_plot("decay <N=1>", "max u", &fit));
    }
}
