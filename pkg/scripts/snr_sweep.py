"""Sum rate of every scheduler versus SNR at 3-bit ADCs."""
import time

from _common import base_config, parser, save
from mmsched.experiment import ALGORITHMS, report_csv, sweep


def main():
    p = parser(__doc__, trials=500)
    p.add_argument("--snr-db", default="-10,-5,0,5,10,15,20")
    p.add_argument("--bits", type=int, default=3)
    args = p.parse_args()
    cfg = base_config(args, bits=args.bits)
    values = [float(v) for v in args.snr_db.split(",")]
    t0 = time.perf_counter()
    rep = sweep(cfg, "snr_db", values, ALGORITHMS, args.trials, workers=args.workers)
    save(args, "snr_sweep", report_csv(rep), cfg, t0, values=values, flags=rep.flags)


if __name__ == "__main__":
    main()
