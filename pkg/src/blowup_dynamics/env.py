BLOWUP_DYNAMICS_LOGLEVEL = "BLOWUP_DYNAMICS_LOGLEVEL"
BLOWUP_DYNAMICS_SEED = "BLOWUP_DYNAMICS_SEED"
BLOWUP_DYNAMICS_TOL = "BLOWUP_DYNAMICS_TOL"
BLOWUP_DYNAMICS_SAMPLES = "BLOWUP_DYNAMICS_SAMPLES"
