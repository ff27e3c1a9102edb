pub mod bessel;
pub mod error;
pub mod interp;
pub mod types;
pub mod oracle;
pub mod quadrature;
pub mod modes;
pub mod soi;
pub mod evolution;
pub mod geometric;
pub mod entanglement;
