"""Block Krylov approximation of matrix functions with a posteriori error bounds."""
