"""Sum rate versus the number of RF chains and versus ADC resolution."""
import time

from _common import INF, base_config, parser, save
from mmsched.experiment import ALGORITHMS, report_csv, sweep


def main():
    p = parser(__doc__, trials=500)
    p.add_argument("--snr-db", type=float, default=6.0)
    args = p.parse_args()
    cfg = base_config(args, rho=10 ** (args.snr_db / 10))
    t0 = time.perf_counter()
    chains = sorted({cfg.S, cfg.M // 4, cfg.M // 2, 3 * cfg.M // 4, cfg.M})
    rep = sweep(cfg, "rf_chains", chains, ALGORITHMS, args.trials, workers=args.workers)
    save(args, "rf_chains", report_csv(rep), cfg, t0, values=chains, flags=rep.flags)
    t0 = time.perf_counter()
    bits = list(range(1, 11)) + [INF]
    rep = sweep(cfg, "bits", bits, ALGORITHMS, args.trials, workers=args.workers)
    save(args, "bits", report_csv(rep), cfg, t0, values=bits, flags=rep.flags)


if __name__ == "__main__":
    main()
