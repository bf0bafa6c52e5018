"""Sweep every bound for two single-antenna users and plot the result.

Runs a reduced-budget SNR sweep on the (K=2, r=2, tau=4) channel, prints
the table, and writes CSV plus a standalone SVG plot next to this script.
The same sweep is available from the command line:

    fadingmac --tau 4 --users 2 --rx 2 --snr-db 0:5:20 \
        --bounds ub_square,ub_csi,lb_ustm,lb_gauss,lb_2user \
        --out-csv sweep.csv --out-svg sweep.svg
"""

import os

from fadingmac import ChannelConfig, SweepSpec, emit_csv, emit_plot, run_sweep

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    cfg = ChannelConfig.single_antenna(tau=4, users=2, rx=2)
    spec = SweepSpec(
        cfg=cfg,
        snr_db=(0.0, 5.0, 10.0, 15.0, 20.0),
        bounds=("ub_square", "ub_csi", "lb_ustm", "lb_gauss", "lb_2user"),
        seed=0,
        samples_outer=2000,
        samples_inner=500,
    )
    print("sweeping", spec.bounds, "over", spec.snr_db, "dB ...")
    results = run_sweep(spec, parallelism=4)

    print(f"\n{'kind':>10} {'SNR dB':>7} {'nats/use':>10} {'std err':>9}")
    for p in results:
        if p.failed:
            print(f"{p.kind:>10} {p.snr_db:7.1f}   failed: {p.error}")
        else:
            print(f"{p.kind:>10} {p.snr_db:7.1f} {p.value:10.4f} {p.std_error:9.4f}")

    csv_path = os.path.join(HERE, "two_user_sweep.csv")
    svg_path = os.path.join(HERE, "two_user_sweep.svg")
    emit_csv(results, csv_path, spec)
    emit_plot(results, svg_path)
    print(f"\nwrote {csv_path}\nwrote {svg_path}")


if __name__ == "__main__":
    main()
