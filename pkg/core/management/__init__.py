# Management package
