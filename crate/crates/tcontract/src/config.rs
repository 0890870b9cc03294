use crate::error::{Error, Result};

/// Cache and register blocking parameters of the multiplication pipeline.
///
/// `m_c`/`n_c`/`k_c` size the packed panels (L2/L3/L1 residency targets);
/// `m_r`/`n_r` are the micro-tile extents; `k_p` is the small depth blocking
/// that subdivides packing into micro-tiles eligible for constant-stride
/// copies. The defaults are the double-precision values tuned for
/// Haswell-class cores and work fine as generic starting points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GemmConfig {
    pub m_c: usize,
    pub n_c: usize,
    pub k_c: usize,
    pub m_r: usize,
    pub n_r: usize,
    pub k_p: usize,
}

impl Default for GemmConfig {
    fn default() -> Self {
        GemmConfig { m_c: 72, n_c: 4080, k_c: 256, m_r: 6, n_r: 8, k_p: 4 }
    }
}

impl GemmConfig {
    /// Validated constructor: all parameters positive, `m_c` a multiple of
    /// `m_r`, `n_c` of `n_r`, `k_c` of `k_p`.
    pub fn new(
        m_c: usize,
        n_c: usize,
        k_c: usize,
        m_r: usize,
        n_r: usize,
        k_p: usize,
    ) -> Result<Self> {
        let cfg = GemmConfig { m_c, n_c, k_c, m_r, n_r, k_p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_c == 0
            || self.n_c == 0
            || self.k_c == 0
            || self.m_r == 0
            || self.n_r == 0
            || self.k_p == 0
        {
            return Err(Error::InvalidConfig("all blocking parameters must be positive".into()));
        }
        if !self.m_c.is_multiple_of(self.m_r) {
            return Err(Error::InvalidConfig(format!(
                "m_c ({}) must be a multiple of m_r ({})",
                self.m_c, self.m_r
            )));
        }
        if !self.n_c.is_multiple_of(self.n_r) {
            return Err(Error::InvalidConfig(format!(
                "n_c ({}) must be a multiple of n_r ({})",
                self.n_c, self.n_r
            )));
        }
        if !self.k_c.is_multiple_of(self.k_p) {
            return Err(Error::InvalidConfig(format!(
                "k_c ({}) must be a multiple of k_p ({})",
                self.k_c, self.k_p
            )));
        }
        Ok(())
    }
}
