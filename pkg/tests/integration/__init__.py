# Integration tests package for apforder
