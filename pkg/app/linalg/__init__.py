"""Dense linear algebra kernels."""
