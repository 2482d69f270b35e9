"""Solve LP-format files with HiGHS and print one verdict per file."""
import sys

try:
    import highspy
except ImportError:
    print("unavailable")
    sys.exit(0)

limit = float(sys.argv[1])
for path in sys.argv[2:]:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", limit)
    if h.readModel(path) == highspy.HighsStatus.kError:
        print(path, "unreadable")
        continue
    h.run()
    st = h.getModelStatus()
    if st == highspy.HighsModelStatus.kOptimal:
        verdict = "feasible"
    elif st == highspy.HighsModelStatus.kInfeasible:
        verdict = "infeasible"
    else:
        verdict = "unknown:" + h.modelStatusToString(st).replace(" ", "_")
    print(path, verdict, flush=True)
