//! Column-major word-by-time grids.
//!
//! Every per-year computation (ranking, column sums, sampling) walks one
//! column at a time, so columns are contiguous: entry `(w, t)` lives at
//! `t * rows + w`.

/// Dense column-major matrix with `rows` words and `cols` time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    data: Vec<T>,
    rows: usize,
    cols: usize,
}

impl<T: Copy + Default> Grid<T> {
    pub fn zeroed(rows: usize, cols: usize) -> Self {
        Grid {
            data: vec![T::default(); rows * cols],
            rows,
            cols,
        }
    }
}

impl<T: Copy> Grid<T> {
    /// Builds a grid from per-time-step columns, which must all share one length.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for col in columns {
            assert_eq!(col.len(), rows, "ragged columns");
            data.extend_from_slice(col);
        }
        Grid { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[col * self.rows + row]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[col * self.rows + row] = value;
    }

    pub fn column(&self, col: usize) -> &[T] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [T] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.rows.max(1))
    }

    /// Strided view of one word's time series.
    pub fn row_iter(&self, row: usize) -> impl Iterator<Item = T> + '_ {
        (0..self.cols).map(move |t| self.get(row, t))
    }

    pub fn row_vec(&self, row: usize) -> Vec<T> {
        self.row_iter(row).collect()
    }
}
