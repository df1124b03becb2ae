# Tests del simulador open GOP
