# Generated by Django 4.2 on 2026-10-18 12:00

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='CorridaSimulacion',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('estado', models.CharField(choices=[('PENDIENTE', 'Pendiente'), ('PROCESANDO', 'Procesando'), ('COMPLETADO', 'Completado'), ('ERROR', 'Error')], default='PENDIENTE', max_length=15)),
                ('tipo', models.CharField(choices=[('VALIDACION', 'Validación de escalera'), ('SIMULACION', 'Simulación de sesión')], default='SIMULACION', max_length=15)),
                ('ruta_escalera', models.CharField(max_length=500)),
                ('ruta_traza', models.CharField(blank=True, default='', max_length=500)),
                ('ruta_schedule', models.CharField(blank=True, default='', max_length=500)),
                ('ruta_salida', models.CharField(blank=True, default='', max_length=500)),
                ('soporta_rpr', models.BooleanField(default=True, verbose_name='Decoder con RPR')),
                ('semilla', models.IntegerField(blank=True, null=True)),
                ('jitter', models.FloatField(default=0.0)),
                ('digest_entradas', models.CharField(blank=True, default='', help_text='sha256 de la escalera usada', max_length=64)),
                ('es_conmutable', models.BooleanField(blank=True, null=True)),
                ('reporte', models.JSONField(blank=True, null=True)),
                ('mensaje_error', models.TextField(blank=True, default='')),
                ('fecha_creacion', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Corrida de simulación',
                'verbose_name_plural': 'Corridas de simulación',
                'ordering': ['-fecha_creacion', '-id'],
            },
        ),
        migrations.CreateModel(
            name='ResultadoSwitch',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('segmento', models.IntegerField()),
                ('desde', models.CharField(max_length=50)),
                ('hacia', models.CharField(max_length=50)),
                ('pedido', models.CharField(max_length=50)),
                ('resultado', models.CharField(max_length=30)),
                ('imagenes_afectadas', models.IntegerField(default=0)),
                ('fallback', models.BooleanField(default=False)),
                ('panico', models.BooleanField(default=False)),
                ('corrida', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='switches', to='core.corridasimulacion')),
            ],
            options={
                'ordering': ['corrida', 'segmento'],
            },
        ),
    ]
