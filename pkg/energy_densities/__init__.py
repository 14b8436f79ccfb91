"""Energy densities module: metric singular spectra, |A|_p, sigma_{p,q}, tau_m and tau_tilde."""

from energy_densities.spectrum import (
    LinearMapData,
    SingularSpectrum,
    SpectrumError,
    batch_schatten,
    batch_singular_values,
    holder_energy_bound,
    metric_whiten,
    norm_comparison,
    schatten_p,
    sigma_pq,
    singular_spectrum,
    spd_power,
    tau_m,
    tau_tilde,
)
