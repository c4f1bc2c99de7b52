//! CSV emission. Numbers are written in scientific notation with a fixed
//! number of significant digits and a '.' separator.

use std::io::Write;

use crate::diagnostics::ConvergenceTable;
use crate::error::Result;
use crate::integrator::StepReport;
use crate::runner::Profile;

pub fn format_number(v: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), v)
}

fn row(w: &mut impl Write, cells: &[String]) -> Result<()> {
    writeln!(w, "{}", cells.join(","))?;
    Ok(())
}

/// `x,T_r,T_e,T_i[,psi_0..psi_M]`.
pub fn write_profile(w: &mut impl Write, p: &Profile, digits: usize, moments: bool) -> Result<()> {
    let m = p.state.m;
    let mut header: Vec<String> = ["x", "T_r", "T_e", "T_i"].iter().map(|s| s.to_string()).collect();
    if moments {
        header.extend((0..=m).map(|l| format!("psi_{l}")));
    }
    row(w, &header)?;
    for j in 0..p.x.len() {
        let mut cells = vec![p.x[j], p.tr[j], p.te[j], p.ti[j]];
        if moments {
            cells.extend_from_slice(p.state.moments(j));
        }
        row(
            w,
            &cells
                .iter()
                .map(|v| format_number(*v, digits))
                .collect::<Vec<_>>(),
        )?;
    }
    Ok(())
}

/// `t,dt,micro_iters,macro_iters,E_total,fallback`.
pub fn write_series(w: &mut impl Write, reports: &[StepReport], digits: usize) -> Result<()> {
    writeln!(w, "t,dt,micro_iters,macro_iters,E_total,fallback")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            format_number(r.t, digits),
            format_number(r.dt, digits),
            r.micro_iters,
            r.macro_iters,
            format_number(r.energy, digits),
            u8::from(r.fallback)
        )?;
    }
    Ok(())
}

/// `n,err_<f>...,order_<f>...`; order columns are omitted for a single row
/// and left empty on the first row.
pub fn write_convergence(w: &mut impl Write, table: &ConvergenceTable, digits: usize) -> Result<()> {
    let with_orders = table.rows.len() > 1;
    let mut header = vec!["n".to_string()];
    header.extend(table.fields.iter().map(|f| format!("err_{f}")));
    if with_orders {
        header.extend(table.fields.iter().map(|f| format!("order_{f}")));
    }
    row(w, &header)?;
    for (i, r) in table.rows.iter().enumerate() {
        let mut cells = vec![r.n.to_string()];
        cells.extend(r.errors.iter().map(|e| format_number(*e, digits)));
        if with_orders {
            match table.orders(i) {
                Some(o) => cells.extend(o.iter().map(|v| format_number(*v, digits))),
                None => cells.extend(std::iter::repeat_n(String::new(), table.fields.len())),
            }
        }
        row(w, &cells)?;
    }
    Ok(())
}

/// `t,l2_T_r,l2_T_e,l2_T_i`.
pub fn write_compare(w: &mut impl Write, rows: &[(f64, [f64; 3])], digits: usize) -> Result<()> {
    writeln!(w, "t,l2_T_r,l2_T_e,l2_T_i")?;
    for (t, d) in rows {
        let mut cells = vec![format_number(*t, digits)];
        cells.extend(d.iter().map(|v| format_number(*v, digits)));
        row(w, &cells)?;
    }
    Ok(())
}

/// `t,E_total,relative_drift`.
pub fn write_energy_audit(w: &mut impl Write, e0: f64, reports: &[StepReport], digits: usize) -> Result<()> {
    writeln!(w, "t,E_total,relative_drift")?;
    row(
        w,
        &[
            format_number(0.0, digits),
            format_number(e0, digits),
            format_number(0.0, digits),
        ],
    )?;
    for r in reports {
        row(
            w,
            &[
                format_number(r.t, digits),
                format_number(r.energy, digits),
                format_number((r.energy - e0) / e0, digits),
            ],
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{init_equilibrium, Grid1D};
    use crate::testutil::ap_params;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn numbers_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = format_number(v, 17);
            prop_assert_eq!(s.parse::<f64>().unwrap(), v);
            prop_assert!(!s.contains(','));
        }
    }

    #[test]
    fn profile_layout() {
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        let p = ap_params(1.0, 1.0);
        let s = init_equilibrium(&g, |_| 1.0, 3, &p).unwrap();
        let prof = Profile::from_state(&g, s, &p);
        let mut buf = Vec::new();
        write_profile(&mut buf, &prof, 17, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,T_r,T_e,T_i,psi_0,psi_1,psi_2,psi_3");
        assert_eq!(lines.len(), 5);
        let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(first, vec![0.125, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let mut buf = Vec::new();
        write_profile(&mut buf, &prof, 17, false).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,T_r,T_e,T_i\n"));
    }

    #[test]
    fn convergence_layout() {
        let mut t = ConvergenceTable::new(&["T_e"]);
        t.push(50, vec![0.02]);
        let mut buf = Vec::new();
        write_convergence(&mut buf, &t, 6).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,err_T_e\n50,2.00000e-2\n");
        t.push(100, vec![0.01]);
        let mut buf = Vec::new();
        write_convergence(&mut buf, &t, 3).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,err_T_e,order_T_e\n50,2.00e-2,\n100,1.00e-2,1.00e0\n"
        );
    }
}
