# Monotone DNF with one absorbed term, its minimal form, and the expected components.
PHI_MONOTONE = "x&u | x&v | y&u | y&v | x&u&v"
PSI_MONOTONE = "x&u | x&v | y&u | y&v"
PSI_COMPONENTS = {"x | y", "u | v"}

# Polynomial of PSI_MONOTONE and its factors.
F_PSI = "x*u + x*v + y*u + y*v"
F_PSI_FACTORS = {"x + y", "u + v"}

# Full DNF over x, y, u, v; each component is an exclusive or.
PHI_FULL = "x&!y&u&!v | x&!y&!u&v | !x&y&u&!v | !x&y&!u&v"
PHI_FULL_COMPONENTS = {"!x&y | x&!y", "!u&v | u&!v"}

# Polynomial of PHI_FULL with negated literals renamed to <name>_neg.
F_PHI_FULL = "x*y_neg*u*v_neg + x*y_neg*u_neg*v + x_neg*y*u*v_neg + x_neg*y*u_neg*v"
F_PHI_FULL_FACTORS = {"x*y_neg + x_neg*y", "u*v_neg + u_neg*v"}
