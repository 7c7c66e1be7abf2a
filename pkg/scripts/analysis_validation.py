"""Closed-form ergodic sum rates next to chordal-scheduling Monte Carlo (single-path users, N = M)."""
import time

from _common import INF, base_config, parser, save
from mmsched.experiment import validate_propositions, validation_csv


def main():
    p = parser(__doc__, trials=10_000)
    p.add_argument("--M", type=int, default=128)
    p.add_argument("--K", type=int, default=200)
    p.add_argument("--S", type=int, default=12)
    p.add_argument("--snr-db", default="-10,-5,0,5,10,15,20")
    args = p.parse_args()
    cfg = base_config(args, M=args.M, N=args.M, K=args.K, S=args.S)
    snrs = [float(v) for v in args.snr_db.split(",")]
    bits = [1, 2, 3, INF]
    t0 = time.perf_counter()
    rows = validate_propositions(cfg, snrs, bits, args.trials)
    save(args, "analysis_validation", validation_csv(rows), cfg, t0, snr_db=snrs, bits=bits)


if __name__ == "__main__":
    main()
