# Unit tests package for apforder
