//! Turning partially specified transitions into full unitaries or Kraus families.
//!
//! Constructions usually pin down only the columns their correctness argument visits.
//! The rest is filled deterministically: free columns, in increasing order, receive the
//! unused directions of the sector, in increasing order.

use std::collections::{BTreeMap, BTreeSet};

use crate::linalg::C64;

use super::op::{Columns, Rest, SparseOp};
use super::QqaError;

const NORM_TOL: f64 = 1e-9;

fn sector_list(dim: usize, sector: Option<&[usize]>) -> (Vec<usize>, Vec<bool>) {
    let list: Vec<usize> = match sector {
        Some(s) => s.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
        None => (0..dim).collect(),
    };
    let mut member = vec![false; dim];
    for &i in &list {
        member[i] = true;
    }
    (list, member)
}

fn check_inside(cols: &Columns, member: &[bool], dim: usize) -> Result<(), QqaError> {
    for (&c, col) in cols {
        if c >= dim || !member[c] {
            return Err(QqaError::Completion(format!("column {c} lies outside the sector")));
        }
        if let Some(&(r, _)) = col.iter().find(|(r, _)| *r >= dim || !member[*r]) {
            return Err(QqaError::Completion(format!("column {c} maps outside the sector (row {r})")));
        }
    }
    Ok(())
}

/// Completes a partial isometry on `sector` (default: whole space) to a unitary.
///
/// Outside the sector the result is the identity.
pub fn complete_unitary(dim: usize, sector: Option<&[usize]>, assigned: Columns) -> Result<SparseOp, QqaError> {
    let (list, member) = sector_list(dim, sector);
    check_inside(&assigned, &member, dim)?;
    for (&c, col) in &assigned {
        let n: f64 = col.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(QqaError::NotIsometric { column: c, norm_sq: n });
        }
    }

    // Group assigned columns that share rows; each group needs its own complement.
    let mut row_owner: BTreeMap<usize, usize> = BTreeMap::new();
    let cols: Vec<usize> = assigned.keys().copied().collect();
    let mut parent: Vec<usize> = (0..cols.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (k, c) in cols.iter().enumerate() {
        for &(r, _) in &assigned[c] {
            if let Some(&other) = row_owner.get(&r) {
                let (a, b) = (find(&mut parent, k), find(&mut parent, other));
                parent[a] = b;
            } else {
                row_owner.insert(r, k);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..cols.len() {
        let root = find(&mut parent, k);
        groups.entry(root).or_default().push(k);
    }
    let mut ordered_groups: Vec<Vec<usize>> = groups.into_values().collect();
    ordered_groups.sort_by_key(|g| cols[g[0]]);

    let mut fill: Vec<Vec<(usize, C64)>> = Vec::new();
    for g in &ordered_groups {
        let rows: BTreeSet<usize> = g.iter().flat_map(|&k| assigned[&cols[k]].iter().map(|&(r, _)| r)).collect();
        if rows.len() < g.len() {
            return Err(QqaError::Completion(format!("columns near {} are linearly dependent", cols[g[0]])));
        }
        if rows.len() == g.len() {
            continue;
        }
        let rows: Vec<usize> = rows.into_iter().collect();
        let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut frame: Vec<Vec<C64>> = Vec::new();
        for &k in g {
            let mut v = vec![C64::new(0.0, 0.0); rows.len()];
            for &(r, a) in &assigned[&cols[k]] {
                v[pos[&r]] += a;
            }
            orthonormalize_into(&mut frame, v);
        }
        let before = frame.len();
        for i in 0..rows.len() {
            let mut e = vec![C64::new(0.0, 0.0); rows.len()];
            e[i] = C64::new(1.0, 0.0);
            orthonormalize_into(&mut frame, e);
        }
        for v in &frame[before..] {
            fill.push(rows.iter().zip(v).filter(|(_, a)| a.norm() > 1e-15).map(|(&r, &a)| (r, a)).collect());
        }
    }
    for &r in &list {
        if !row_owner.contains_key(&r) {
            fill.push(vec![(r, C64::new(1.0, 0.0))]);
        }
    }

    let free: Vec<usize> = list.iter().copied().filter(|c| !assigned.contains_key(c)).collect();
    if free.len() != fill.len() {
        return Err(QqaError::Completion(format!(
            "{} free columns but {} free directions",
            free.len(),
            fill.len()
        )));
    }
    let mut columns = assigned;
    for (c, img) in free.into_iter().zip(fill) {
        columns.insert(c, img);
    }
    let rest = if list.len() == dim { Rest::Zero } else { Rest::Identity };
    SparseOp::from_columns(dim, columns, rest)
}

fn orthonormalize_into(frame: &mut Vec<Vec<C64>>, mut v: Vec<C64>) {
    for _ in 0..2 {
        for f in frame.iter() {
            let ov: C64 = f.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(f) {
                *x -= ov * y;
            }
        }
    }
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 1e-8 {
        v.iter_mut().for_each(|x| *x /= n);
        frame.push(v);
    }
}

/// Completes partial Kraus operators on `sector` so that `sum_e K_e^dagger K_e = I`.
///
/// Missing column weight goes to unused rows of the first operator. Outside the sector
/// the first operator is the identity and the others vanish.
pub fn complete_kraus(dim: usize, sector: Option<&[usize]>, partial: Vec<Columns>) -> Result<Vec<SparseOp>, QqaError> {
    if partial.is_empty() {
        return Err(QqaError::Completion("empty Kraus family".to_string()));
    }
    let (list, member) = sector_list(dim, sector);
    for p in &partial {
        check_inside(p, &member, dim)?;
    }
    let mut partial = partial;
    let used: BTreeSet<usize> = partial[0].values().flat_map(|col| col.iter().map(|&(r, _)| r)).collect();
    let mut fresh = list.iter().copied().filter(|r| !used.contains(r));
    for &c in &list {
        let w: f64 = partial.iter().filter_map(|p| p.get(&c)).flat_map(|col| col.iter()).map(|(_, a)| a.norm_sqr()).sum();
        if w > 1.0 + NORM_TOL {
            return Err(QqaError::NotIsometric { column: c, norm_sq: w });
        }
        let entry = partial[0].entry(c).or_default();
        if w < 1.0 - 1e-12 {
            let r = fresh
                .next()
                .ok_or_else(|| QqaError::Completion(format!("no unused row left for column {c}")))?;
            entry.push((r, C64::new((1.0 - w).sqrt(), 0.0)));
        }
    }
    let first_rest = if list.len() == dim { Rest::Zero } else { Rest::Identity };
    partial
        .into_iter()
        .enumerate()
        .map(|(e, cols)| SparseOp::from_columns(dim, cols, if e == 0 { first_rest } else { Rest::Zero }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qqa::validate::family_defect;
    use crate::linalg::EigenSettings;

    fn one(r: usize) -> Vec<(usize, C64)> {
        vec![(r, C64::new(1.0, 0.0))]
    }

    #[test]
    fn partial_shift_becomes_unitary() {
        let assigned: Columns = [(0, one(1)), (1, one(2))].into_iter().collect();
        let u = complete_unitary(4, None, assigned).unwrap();
        assert_eq!(u.column(2), one(0));
        assert_eq!(u.column(3), one(3));
        assert!(family_defect(&[u], &EigenSettings::default()).unwrap() < 1e-12);
    }

    #[test]
    fn superposed_column_gets_orthogonal_partner() {
        let s = 1.0 / 2f64.sqrt();
        let assigned: Columns = [(0, vec![(0, C64::new(s, 0.0)), (1, C64::new(s, 0.0))])].into_iter().collect();
        let u = complete_unitary(3, None, assigned).unwrap();
        assert!(family_defect(&[u], &EigenSettings::default()).unwrap() < 1e-12);
    }

    #[test]
    fn sector_leaves_outside_untouched() {
        let assigned: Columns = [(2, one(3))].into_iter().collect();
        let u = complete_unitary(5, Some(&[2, 3]), assigned).unwrap();
        assert_eq!(u.column(3), one(2));
        assert_eq!(u.column(0), one(0));
    }

    #[test]
    fn kraus_deficit_goes_to_first_operator() {
        let h = C64::new(0.6, 0.0);
        let k0: Columns = [(0, vec![(0, h)])].into_iter().collect();
        let k1: Columns = [(0, vec![(1, C64::new(0.0, 0.8))]), (1, one(0))].into_iter().collect();
        let fam = complete_kraus(2, None, vec![k0, k1]).unwrap();
        assert!(family_defect(&fam, &EigenSettings::default()).unwrap() < 1e-12);
    }

    #[test]
    fn overweight_column_is_rejected() {
        let k0: Columns = [(0, vec![(0, C64::new(1.0, 0.0))])].into_iter().collect();
        let k1: Columns = [(0, vec![(1, C64::new(0.5, 0.0))])].into_iter().collect();
        assert!(matches!(complete_kraus(2, None, vec![k0, k1]), Err(QqaError::NotIsometric { column: 0, .. })));
    }
}
