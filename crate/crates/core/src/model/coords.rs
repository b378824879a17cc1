use fixedbitset::FixedBitSet;

/// A set of matrix coordinates over `[rows] x [cols]`, stored as a dense
/// row-major bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoordSet {
    rows: usize,
    cols: usize,
    bits: FixedBitSet,
}

impl CoordSet {
    pub fn empty(rows: usize, cols: usize) -> Self {
        CoordSet {
            rows,
            cols,
            bits: FixedBitSet::with_capacity(rows * cols),
        }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        let mut set = Self::empty(rows, cols);
        set.bits.insert_range(..);
        set
    }

    /// The diagonal coordinates of an `n x n` region.
    pub fn diagonal(n: usize) -> Self {
        let mut set = Self::empty(n, n);
        for i in 0..n {
            set.insert(i, i);
        }
        set
    }

    pub fn from_fn(rows: usize, cols: usize, mut member: impl FnMut(usize, usize) -> bool) -> Self {
        let mut set = Self::empty(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if member(i, j) {
                    set.insert(i, j);
                }
            }
        }
        set
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        i * self.cols + j
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits.contains(self.index(i, j))
    }

    #[inline]
    pub fn insert(&mut self, i: usize, j: usize) {
        let idx = self.index(i, j);
        self.bits.insert(idx);
    }

    #[inline]
    pub fn remove(&mut self, i: usize, j: usize) {
        let idx = self.index(i, j);
        self.bits.set(idx, false);
    }

    pub fn set(&mut self, i: usize, j: usize, member: bool) {
        let idx = self.index(i, j);
        self.bits.set(idx, member);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    fn assert_same_shape(&self, other: &Self) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "coordinate sets over different grids"
        );
    }

    pub fn union(&self, other: &Self) -> Self {
        self.assert_same_shape(other);
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.assert_same_shape(other);
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.assert_same_shape(other);
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        out
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        out.bits.toggle_range(..);
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.assert_same_shape(other);
        self.bits.is_subset(&other.bits)
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    /// First coordinate `(i, j)` in row-major order whose mirror is absent.
    pub fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if self.rows != self.cols {
            return Some((0, 0));
        }
        self.iter().find(|&(i, j)| !self.contains(j, i))
    }

    /// Members in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.bits.ones().map(move |idx| (idx / cols, idx % cols))
    }

    /// Members of column `j`, in increasing row order.
    pub fn column(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows).filter(move |&i| self.contains(i, j))
    }
}
