# Fixtures package for the apforder test suite
