//! Gaussian elimination over [`CoeffElement`].

use crate::coeff::CoeffElement;
use crate::error::{Error, Result};

/// Result of eliminating the unknown columns of `[U | P]`.
#[derive(Clone, Debug)]
pub struct Elimination {
    /// `(unknown column, coefficients of the parameters)`: `x_k = sum_j coeff_j p_j`.
    pub solved: Vec<(usize, Vec<CoeffElement>)>,
    /// Unknown columns left without a pivot.
    pub free: Vec<usize>,
    /// Relations `sum_j coeff_j p_j = 0`, in reduced row echelon form.
    pub constraints: Vec<Vec<CoeffElement>>,
    /// Pivot parameter column of each constraint.
    pub constraint_pivots: Vec<usize>,
}

fn pick_pivot(rows: &[Vec<CoeffElement>], from: usize, col: usize) -> Option<usize> {
    rows.iter()
        .enumerate()
        .skip(from)
        .filter(|(_, r)| !r[col].is_zero() && r[col].is_invertible())
        .min_by_key(|(_, r)| r[col].size())
        .map(|(i, _)| i)
}

fn normalize_row(row: &mut [CoeffElement], col: usize) -> Result<()> {
    let inv = row[col].inv()?;
    for e in row.iter_mut() {
        if !e.is_zero() {
            *e = &*e * &inv;
        }
    }
    Ok(())
}

fn eliminate(rows: &mut [Vec<CoeffElement>], pivot: usize, col: usize, from: usize) {
    let prow = rows[pivot].clone();
    let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
    for (i, row) in rows.iter_mut().enumerate().skip(from) {
        if i == pivot || row[col].is_zero() {
            continue;
        }
        let factor = row[col].clone();
        for &j in &nz {
            row[j] = &row[j] - &(&factor * &prow[j]);
        }
    }
}

/// Reduced row echelon form over the columns in `order`; zero rows are dropped.
pub fn rref(mut rows: Vec<Vec<CoeffElement>>, order: &[usize]) -> Result<(Vec<Vec<CoeffElement>>, Vec<usize>)> {
    rows.retain(|r| r.iter().any(|e| !e.is_zero()));
    let mut rank = 0;
    let mut pivots = Vec::new();
    for &col in order {
        if rank == rows.len() {
            break;
        }
        let Some(p) = pick_pivot(&rows, rank, col) else {
            if rows[rank..].iter().any(|r| !r[col].is_zero()) {
                return Err(Error::Coeff(crate::error::CoeffError::NotInvertible(format!("no invertible pivot in column {col}"))));
            }
            continue;
        };
        rows.swap(rank, p);
        normalize_row(&mut rows[rank], col)?;
        eliminate(&mut rows, rank, col, 0);
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    Ok((rows, pivots))
}

/// Eliminate columns `0..n_unknowns` of the homogeneous system `rows * (x, p) = 0`,
/// then reduce the leftover relations among the parameter columns.
///
/// `param_order` fixes the pivot preference used for the constraints.
pub fn eliminate_unknowns(mut rows: Vec<Vec<CoeffElement>>, n_unknowns: usize, param_order: &[usize]) -> Result<Elimination> {
    rows.retain(|r| r.iter().any(|e| !e.is_zero()));
    let n_cols = rows.first().map_or(n_unknowns + param_order.len(), |r| r.len());
    let mut rank = 0;
    let mut pivots = Vec::new();
    let mut free = Vec::new();
    for col in 0..n_unknowns {
        match pick_pivot(&rows, rank, col) {
            Some(p) => {
                rows.swap(rank, p);
                normalize_row(&mut rows[rank], col)?;
                eliminate(&mut rows, rank, col, 0);
                pivots.push(col);
                rank += 1;
            }
            None => {
                if rows[rank..].iter().any(|r| !r[col].is_zero()) {
                    return Err(Error::Coeff(crate::error::CoeffError::NotInvertible(format!("no invertible pivot for unknown {col}"))));
                }
                free.push(col);
            }
        }
    }
    let rest: Vec<Vec<CoeffElement>> = rows[rank..].iter().map(|r| r[n_unknowns..].to_vec()).collect();
    let (constraints, cpiv) = rref(rest, param_order)?;
    // reduce the solved rows modulo the constraints
    for row in rows.iter_mut().take(rank) {
        for (c, &pc) in constraints.iter().zip(&cpiv) {
            let factor = row[n_unknowns + pc].clone();
            if factor.is_zero() {
                continue;
            }
            for (j, e) in c.iter().enumerate() {
                if !e.is_zero() {
                    row[n_unknowns + j] = &row[n_unknowns + j] - &(&factor * e);
                }
            }
        }
    }
    let solved = pivots
        .iter()
        .zip(rows.iter())
        .map(|(&k, row)| {
            if free.iter().any(|&f| !row[f].is_zero()) {
                return Err(Error::InconsistentSystem(format!("unknown {k} depends on an undetermined unknown")));
            }
            Ok((k, row[n_unknowns..n_cols].iter().map(|e| -e).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Elimination { solved, free, constraints, constraint_pivots: cpiv })
}
