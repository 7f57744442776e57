"""Print the headline numbers for the bundled parameter set."""

from pmerepeater import analytics
from pmerepeater.analytics import CavityParams
from pmerepeater.config import load_config


def main() -> None:
    cfg = load_config("paper")
    p = cfg.protocol
    rates = analytics.success_probs(p)
    print(f"L0        = {p.L0:.2f} km")
    for key, value in rates.as_dict().items():
        print(f"{key:<9} = {value:.6g}")
    for name, speedup in analytics.reference_comparison(p).speedups.items():
        print(f"speedup vs {name:<4} = {speedup:.1f}x")
    cav = cfg.cavity or CavityParams.from_free_space_factor(1e-2, Q=1000)
    print(f"R_sn      = {analytics.cavity_snr(cav):.3g} (free space {analytics.free_space_snr(cav):.3g})")


if __name__ == "__main__":
    main()
