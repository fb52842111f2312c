//! Dispersions, interaction kernels and Hamiltonian assembly.

pub mod assemble;
pub mod dilation;
pub mod kernel;
pub mod params;

pub use assemble::{
    assemble_h, assemble_h0, assemble_hi, channel_b, channel_b_star, mode_energies, reduced_operator,
    species_occupation, Hamiltonian,
};
pub use dilation::{dilation_kernel, dilation_kernel_fd, dilation_kernel_gaussian, regularity, Regularity};
pub use kernel::{
    quark_decay_gaussian, quark_decay_kernel, random_kernel, sharp_cutoff_kernel, smooth_gaussian_kernel, Channel,
    ChannelTensor, Kernel, KernelOrigin, ReducedForm, ReducedKernel,
};
pub use params::{dispersion, norm3, PhysicalParams};
