# Test package for apforder
