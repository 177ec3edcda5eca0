use std::cell::UnsafeCell;

/// A slice that many workers may write concurrently, provided no two of them
/// ever touch the same index.
///
/// Rank sweeps walk vertices through a permutation, so each index is owned by
/// exactly one worker during a phase.
pub(crate) struct DisjointSlice<'a, T> {
    cells: &'a [UnsafeCell<T>],
}

unsafe impl<T: Send> Sync for DisjointSlice<'_, T> {}

impl<'a, T: Copy> DisjointSlice<'a, T> {
    pub(crate) fn new(slice: &'a mut [T]) -> Self {
        let len = slice.len();
        let ptr = slice.as_mut_ptr() as *const UnsafeCell<T>;
        // SAFETY: UnsafeCell<T> has the same layout as T, and the exclusive
        // borrow is held for 'a.
        let cells = unsafe { std::slice::from_raw_parts(ptr, len) };
        Self { cells }
    }

    /// # Safety
    ///
    /// No other thread may read or write `index` while this call runs.
    #[inline]
    pub(crate) unsafe fn write(&self, index: usize, value: T) {
        *self.cells[index].get() = value;
    }
}
