"""Symbolic set tables: what the engine knows before seeing any data.

Every discrete family attaches a set of differenced-u values to each outcome
path.  With symbolic parameters those sets, their identical pairs, and the
retained core determining collection can be computed once per sign regime.
"""

from panelbounds.tables import generate_table

print("Dynamic binary response, three periods, latent initial condition,")
print("positive lag coefficient - the eight u-compatible sets:\n")
print(generate_table("ustar_dbr3_gpos"))

print("Simultaneous binary response: sixteen outcome paths, twelve non-full")
print("sets, four identical pairs, eight distinct sets, 254 candidate unions:\n")
print(generate_table("ustar_ses2"))

print("...and the 25 retained test sets (generators T, containment sets Y):\n")
print(generate_table("cdc_ses2"))
