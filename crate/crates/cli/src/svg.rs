//! Minimal SVG emitter for the best-scheme map of a sweep.

use std::collections::BTreeMap;
use std::fmt::Write;

use gridcat::oracle::SweepRow;

const CELL: usize = 18;
const MARGIN: usize = 60;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// One cell per `(M, K = L)` at `T = t`, coloured by the valid scheme with
/// the fewest workers (earlier schemes win ties).
pub fn best_scheme_map(rows: &[SweepRow], t: usize) -> String {
    let mut schemes: Vec<&str> = Vec::new();
    let mut best: BTreeMap<(usize, usize), (usize, &str)> = BTreeMap::new();
    for r in rows {
        if !schemes.contains(&r.scheme.as_str()) {
            schemes.push(&r.scheme);
        }
        let Some(n) = r.n.filter(|_| r.valid && r.k == r.l && r.t == t) else {
            continue;
        };
        let e = best.entry((r.m, r.k)).or_insert((n, &r.scheme));
        if n < e.0 {
            *e = (n, &r.scheme);
        }
    }
    let ms: Vec<usize> = {
        let mut v: Vec<usize> = rows.iter().map(|r| r.m).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let ks: Vec<usize> = {
        let mut v: Vec<usize> = rows.iter().filter(|r| r.k == r.l).map(|r| r.k).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let plot_w = ms.len() * CELL;
    let plot_h = ks.len() * CELL;
    let legend_y = MARGIN + plot_h + 40;
    let width = (2 * MARGIN + plot_w).max(520);
    let height = legend_y + 20 * (schemes.len() + 2) + 10;
    let color = |s: &str| PALETTE[schemes.iter().position(|x| *x == s).unwrap_or(0) % PALETTE.len()];

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="20">Fewest workers, T = {t}, K = L</text>"#);
    for (xi, m) in ms.iter().enumerate() {
        let x = MARGIN + xi * CELL + CELL / 2;
        let _ = writeln!(svg, r#"<text x="{x}" y="{}" text-anchor="middle">{m}</text>"#, MARGIN + plot_h + 14);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">M</text>"#, MARGIN + plot_w / 2, MARGIN + plot_h + 28);
    for (yi, k) in ks.iter().enumerate() {
        let y = MARGIN + plot_h - yi * CELL - CELL / 2 + 4;
        let _ = writeln!(svg, r#"<text x="{}" y="{y}" text-anchor="end">{k}</text>"#, MARGIN - 6);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">K=L</text>"#, MARGIN - 30, MARGIN - 8);
    for (xi, m) in ms.iter().enumerate() {
        for (yi, k) in ks.iter().enumerate() {
            let x = MARGIN + xi * CELL;
            let y = MARGIN + plot_h - (yi + 1) * CELL;
            match best.get(&(*m, *k)) {
                Some((n, s)) => {
                    let _ = writeln!(
                        svg,
                        r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="white"><title>K=L={k} M={m}: {} N={n}</title></rect>"#,
                        color(s),
                        escape(s)
                    );
                }
                None => {
                    let _ = writeln!(
                        svg,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#f4f4f4" stroke="white"/>"##
                    );
                }
            }
        }
    }
    for (i, s) in schemes.iter().enumerate() {
        let y = legend_y + 20 * i;
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10,
            color(s),
            MARGIN + 18,
            y,
            escape(s)
        );
    }
    let note_y = legend_y + 20 * schemes.len() + 6;
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{note_y}" font-style="italic">Only the schemes listed were evaluated; schemes from the literature are absent.</text>"#
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, m: usize, scheme: &str, n: Option<usize>, valid: bool) -> SweepRow {
        SweepRow {
            k,
            m,
            l: k,
            t: 2,
            scheme: scheme.into(),
            n,
            valid,
            bound: None,
        }
    }

    #[test]
    fn picks_fewest_workers_and_escapes() {
        let rows = [
            row(2, 2, "a", Some(20), true),
            row(2, 2, "b<&>", Some(10), true),
            row(2, 3, "a", Some(5), true),
            row(2, 3, "b<&>", Some(1), false),
        ];
        let svg = best_scheme_map(&rows, 2);
        assert!(svg.contains("K=L=2 M=2: b&lt;&amp;&gt; N=10"));
        assert!(svg.contains("K=L=2 M=3: a N=5"));
        assert!(svg.contains("schemes from the literature are absent"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
